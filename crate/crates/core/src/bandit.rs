//! Disjoint-arm LinUCB over the aggregation rules, plus the cost-aware reward.
//!
//! Each arm keeps the ridge statistics `A = I + Σ x xᵀ` and `b = Σ r x`.
//! Scoring factors `A` once per call (Cholesky) and reuses the factor for
//! both `θ̂ = A⁻¹ b` and the confidence width `sqrt(xᵀ A⁻¹ x)`.

use serde::{Deserialize, Serialize};

use crate::aggregation::RuleId;
use crate::diagnostics::ContextScaling;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    dim: usize,
    /// Row-major `dim × dim`.
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Lower-triangular Cholesky factor of an SPD matrix.
struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn factor(a: &[f64], dim: usize) -> Option<Self> {
        let mut l = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut s = a[i * dim + j];
                for k in 0..j {
                    s -= l[i * dim + k] * l[j * dim + k];
                }
                if i == j {
                    if !(s > 1e-12) {
                        return None;
                    }
                    l[i * dim + i] = s.sqrt();
                } else {
                    l[i * dim + j] = s / l[j * dim + j];
                }
            }
        }
        Some(Self { dim, l })
    }

    /// Solves `L y = v`.
    fn forward(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.l[i * n + k] * y[k]).sum();
            y[i] = (v[i] - s) / self.l[i * n + i];
        }
        y
    }

    /// Solves `A x = v` with `A = L Lᵀ`.
    fn solve(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let y = self.forward(v);
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.l[k * n + i] * x[k]).sum();
            x[i] = (y[i] - s) / self.l[i * n + i];
        }
        x
    }
}

impl ArmState {
    /// `A = I`, `b = 0`.
    pub fn new(dim: usize) -> Self {
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = 1.0;
        }
        Self {
            dim,
            a,
            b: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn design_matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn response(&self) -> &[f64] {
        &self.b
    }

    /// Rank-one update `A += x xᵀ`, `b += r x`.
    pub fn update(&mut self, x: &[f64], reward: f64) {
        debug_assert_eq!(x.len(), self.dim);
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                self.a[i * d + j] += x[i] * x[j];
            }
            self.b[i] += reward * x[i];
        }
    }

    fn factor(&self) -> Option<Cholesky> {
        Cholesky::factor(&self.a, self.dim)
    }

    /// Ridge estimate `θ̂ = A⁻¹ b`; `None` if `A` is not positive definite.
    pub fn theta(&self) -> Option<Vec<f64>> {
        self.factor().map(|c| c.solve(&self.b))
    }

    /// `(xᵀ θ̂, sqrt(xᵀ A⁻¹ x))`.
    pub fn estimate(&self, x: &[f64]) -> Option<(f64, f64)> {
        let chol = self.factor()?;
        let theta = chol.solve(&self.b);
        let mean = theta.iter().zip(x).map(|(t, v)| t * v).sum();
        let y = chol.forward(x);
        let width = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        Some((mean, width))
    }

    pub fn ucb(&self, x: &[f64], alpha: f64) -> Option<f64> {
        self.estimate(x).map(|(mean, width)| mean + alpha * width)
    }
}

/// Free-function form of [`ArmState::update`].
pub fn update_arm(arm: &mut ArmState, x: &[f64], reward: f64) {
    arm.update(x, reward);
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub arm: usize,
    pub scores: Vec<f64>,
}

/// Picks the arm with the highest UCB score.
///
/// Arms whose scores tie with the maximum (to 1e-12 relative) are served
/// round-robin: the `round % tied.len()`-th tied arm is chosen, so round 0
/// with fresh arms picks arm 0.
pub fn select_arm(arms: &[ArmState], x: &[f64], alpha: f64, round: usize) -> Result<Selection> {
    if arms.is_empty() {
        return Err(Error::InvalidArgument("no arms".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite context".into()));
    }
    let scores = arms
        .iter()
        .enumerate()
        .map(|(i, arm)| {
            if x.len() != arm.dim {
                return Err(Error::DimensionMismatch {
                    expected: arm.dim,
                    got: x.len(),
                });
            }
            arm.ucb(x, alpha).ok_or(Error::SingularArm { arm: i })
        })
        .collect::<Result<Vec<f64>>>()?;
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * best.abs().max(1.0);
    let tied: Vec<usize> = (0..scores.len())
        .filter(|&i| best - scores[i] <= tol)
        .collect();
    Ok(Selection {
        arm: tied[round % tied.len()],
        scores,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BanditConfig {
    pub alpha: f64,
    pub num_arms: usize,
    pub context_dim: usize,
    pub context_scaling: ContextScaling,
}

impl Default for BanditConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            num_arms: 3,
            context_dim: 3,
            context_scaling: ContextScaling::Ratio,
        }
    }
}

impl BanditConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("bandit.alpha", "must be finite and >= 0"));
        }
        if self.num_arms != RuleId::ALL.len() {
            return Err(Error::config("bandit.num_arms", "must equal 3 (one per rule)"));
        }
        if self.context_dim != 3 {
            return Err(Error::config(
                "bandit.context_dim",
                "must equal 3 (the diagnostic state size)",
            ));
        }
        Ok(())
    }
}

/// Heuristic per-rule defense cost, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostTable {
    pub fedavg: f64,
    pub median: f64,
    pub krum: f64,
}

impl Default for CostTable {
    fn default() -> Self {
        Self {
            fedavg: 0.1,
            median: 0.4,
            krum: 0.8,
        }
    }
}

impl CostTable {
    pub fn cost(&self, rule: RuleId) -> f64 {
        match rule {
            RuleId::FedAvg => self.fedavg,
            RuleId::Median => self.median,
            RuleId::Krum => self.krum,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for rule in RuleId::ALL {
            let c = self.cost(rule);
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::config(
                    format!("costs.{}", rule.name()),
                    "must lie in [0, 1]",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardParams {
    pub lambda_cost: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self { lambda_cost: 0.5 }
    }
}

/// `(acc_t - acc_prev) - lambda_cost * cost(rule)`, accuracies in `[0, 1]`.
pub fn compute_reward(
    acc_t: f64,
    acc_prev: f64,
    rule: RuleId,
    costs: &CostTable,
    params: &RewardParams,
) -> f64 {
    (acc_t - acc_prev) - params.lambda_cost * costs.cost(rule)
}

/// The controller: one [`ArmState`] per aggregation rule.
#[derive(Debug, Clone)]
pub struct LinUcb {
    cfg: BanditConfig,
    arms: Vec<ArmState>,
}

impl LinUcb {
    pub fn new(cfg: BanditConfig) -> Self {
        Self {
            arms: (0..cfg.num_arms)
                .map(|_| ArmState::new(cfg.context_dim))
                .collect(),
            cfg,
        }
    }

    pub fn arms(&self) -> &[ArmState] {
        &self.arms
    }

    pub fn select(&self, x: &[f64], round: usize) -> Result<Selection> {
        select_arm(&self.arms, x, self.cfg.alpha, round)
    }

    pub fn update(&mut self, arm: usize, x: &[f64], reward: f64) {
        self.arms[arm].update(x, reward);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_arms_tie_and_rotate() {
        let arms = vec![ArmState::new(3); 3];
        let x = [0.3, 0.4, 1.2];
        let s = select_arm(&arms, &x, 1.5, 0).unwrap();
        assert_eq!(s.arm, 0);
        for score in &s.scores {
            assert!((score - 1.5 * 1.3).abs() < 1e-12);
        }
        assert_eq!(select_arm(&arms, &x, 1.5, 1).unwrap().arm, 1);
        assert_eq!(select_arm(&arms, &x, 1.5, 5).unwrap().arm, 2);
    }

    #[test]
    fn one_step_closed_form() {
        let mut arms = vec![ArmState::new(3); 3];
        arms[1].update(&[1.0, 0.0, 0.0], 1.0);
        assert_eq!(
            arms[1].design_matrix(),
            &[2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
        );
        assert_eq!(arms[1].response(), &[1.0, 0.0, 0.0]);
        let theta = arms[1].theta().unwrap();
        assert!((theta[0] - 0.5).abs() < 1e-15 && theta[1] == 0.0 && theta[2] == 0.0);
        let s = select_arm(&arms, &[1.0, 0.0, 0.0], 1.5, 0).unwrap();
        assert_eq!(s.arm, 1);
        assert!((s.scores[1] - (0.5 + 1.5 / 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(s.scores[0], 1.5);
        assert_eq!(s.scores[2], 1.5);
    }

    #[test]
    fn zero_alpha_is_greedy() {
        let mut arms = vec![ArmState::new(2); 3];
        arms[0].update(&[1.0, 0.0], 0.2);
        arms[1].update(&[0.0, 1.0], 0.9);
        arms[2].update(&[1.0, 1.0], 0.1);
        let x = [0.2, 0.9];
        let s = select_arm(&arms, &x, 0.0, 0).unwrap();
        let greedy = (0..3)
            .map(|a| {
                let t = arms[a].theta().unwrap();
                t[0] * x[0] + t[1] * x[1]
            })
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        assert_eq!(s.arm, greedy);
    }

    #[test]
    fn zero_context_changes_nothing() {
        let mut arm = ArmState::new(3);
        arm.update(&[0.0; 3], 5.0);
        assert_eq!(arm, ArmState::new(3));
    }

    #[test]
    fn outer_product_update() {
        let mut arm = ArmState::new(2);
        update_arm(&mut arm, &[1.0, 1.0], 0.0);
        assert_eq!(arm.design_matrix(), &[2.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_context() {
        let arms = vec![ArmState::new(3); 3];
        assert!(select_arm(&arms, &[f64::NAN, 0.0, 0.0], 1.0, 0).is_err());
        assert!(select_arm(&arms, &[1.0, 0.0], 1.0, 0).is_err());
    }

    #[test]
    fn reward_cost_table_cases() {
        let costs = CostTable::default();
        let r = compute_reward(0.40, 0.35, RuleId::Median, &costs, &RewardParams { lambda_cost: 0.5 });
        assert!((r - (-0.15)).abs() < 1e-15);
        let r = compute_reward(0.5, 0.5, RuleId::Krum, &costs, &RewardParams { lambda_cost: 2.0 });
        assert_eq!(r, -1.6);
        let r = compute_reward(0.7, 0.25, RuleId::Krum, &costs, &RewardParams { lambda_cost: 0.0 });
        assert_eq!(r, 0.7 - 0.25);
    }

    #[test]
    fn explored_arm_confidence_width_shrinks() {
        // Arm 0 sees the same context repeatedly with zero reward: its
        // exploration bonus shrinks, so its lead over the untouched arm does too.
        let x = [0.5, 0.2, 0.8];
        let mut arms = vec![ArmState::new(3); 2];
        let mut last_gap = f64::NEG_INFINITY;
        for _ in 0..30 {
            let s = select_arm(&arms, &x, 1.5, 0).unwrap();
            let gap = s.scores[1] - s.scores[0];
            assert!(gap >= last_gap - 1e-12);
            last_gap = gap;
            arms[0].update(&x, 0.0);
        }
    }
}
