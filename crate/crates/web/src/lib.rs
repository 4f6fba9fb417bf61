//! Browser bindings for the simulator.
//!
//! Three operations back the demo page: stepping a scenario round by round,
//! previewing a Dirichlet label split, and probing the controller's reward
//! and UCB arithmetic. Each has a plain-Rust form returning JSON text so it
//! can be tested natively; the `wasm_bindgen` wrappers only convert errors.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use aggpilot::bandit::{compute_reward, select_arm, ArmState, CostTable, RewardParams};
use aggpilot::data::{dirichlet_partition, generate_synthetic, PartitionConfig};
use aggpilot::orchestrator::summarize;
use aggpilot::{RoundLog, RuleId, ScenarioConfig, Simulation};

fn round_json(r: &RoundLog) -> Value {
    json!({
        "round": r.round,
        "rule": r.chosen_rule.name(),
        "norm_variance": r.state.norm_variance,
        "avg_cos_sim": r.state.avg_cosine_similarity,
        "mean_update_norm": r.state.mean_update_norm,
        "context": r.scaled_state,
        "val_accuracy": r.val_accuracy,
        "test_accuracy": r.test_accuracy,
        "reward": r.reward,
        "ucb": r.ucb_scores,
    })
}

/// A scenario advanced one round per call.
#[wasm_bindgen]
pub struct Stepper {
    sim: Simulation,
    log: Vec<RoundLog>,
}

impl Stepper {
    pub fn create(config_json: &str) -> Result<Stepper, String> {
        let cfg = ScenarioConfig::from_json(config_json).map_err(|e| e.to_string())?;
        let sim = Simulation::new(cfg).map_err(|e| e.to_string())?;
        Ok(Stepper { sim, log: Vec::new() })
    }

    /// Runs the next round; `None` once all configured rounds are done.
    pub fn advance(&mut self) -> Result<Option<String>, String> {
        if self.finished() {
            return Ok(None);
        }
        let row = self.sim.run_round().map_err(|e| e.to_string())?;
        let out = round_json(&row).to_string();
        self.log.push(row);
        Ok(Some(out))
    }

    pub fn summary_text(&self) -> String {
        serde_json::to_string(&summarize(self.sim.config(), &self.log)).expect("summary serializes")
    }
}

#[wasm_bindgen]
impl Stepper {
    #[wasm_bindgen(constructor)]
    pub fn new(config_json: &str) -> Result<Stepper, JsError> {
        Stepper::create(config_json).map_err(|e| JsError::new(&e))
    }

    /// JSON for the round just run, or `undefined` when finished.
    pub fn step(&mut self) -> Result<Option<String>, JsError> {
        self.advance().map_err(|e| JsError::new(&e))
    }

    pub fn finished(&self) -> bool {
        self.log.len() >= self.sim.config().rounds
    }

    #[wasm_bindgen(js_name = totalRounds)]
    pub fn total_rounds(&self) -> usize {
        self.sim.config().rounds
    }

    pub fn summary(&self) -> String {
        self.summary_text()
    }

    /// Which clients are malicious, as a JSON array of booleans.
    pub fn malicious(&self) -> String {
        serde_json::to_string(self.sim.malicious()).expect("bools serialize")
    }
}

/// Per-client class counts for a Dirichlet split of a balanced synthetic set.
pub fn partition_counts(
    num_classes: usize,
    samples_per_class: usize,
    num_clients: usize,
    beta: f64,
    seed: u64,
) -> Result<String, String> {
    let ds = generate_synthetic(num_classes, 2, samples_per_class, 1.0, seed).map_err(|e| e.to_string())?;
    let part = dirichlet_partition(&ds, &PartitionConfig { beta, num_clients, seed }).map_err(|e| e.to_string())?;
    let counts: Vec<Vec<usize>> = part
        .assignments
        .iter()
        .map(|idx| {
            let mut c = vec![0; num_classes];
            for &i in idx {
                c[ds.label(i)] += 1;
            }
            c
        })
        .collect();
    Ok(json!({
        "counts": counts,
        "entropy": part.label_entropies(&ds),
        "max_entropy": (num_classes as f64).ln(),
    })
    .to_string())
}

#[wasm_bindgen(js_name = partitionPreview)]
pub fn partition_preview(
    num_classes: usize,
    samples_per_class: usize,
    num_clients: usize,
    beta: f64,
    seed: u64,
) -> Result<String, JsError> {
    partition_counts(num_classes, samples_per_class, num_clients, beta, seed).map_err(|e| JsError::new(&e))
}

/// Replays a short history of `(arm, context, accuracy)` plays and reports the
/// rewards earned and the UCB scores each arm would get at `probe`.
///
/// `history_json` is an array of `{"arm": 0..2, "x": [3 reals], "acc": real}`;
/// accuracies chain from `start_acc`.
pub fn explore_controller(
    history_json: &str,
    start_acc: f64,
    lambda: f64,
    alpha: f64,
    probe_json: &str,
) -> Result<String, String> {
    let history: Vec<Value> = serde_json::from_str(history_json).map_err(|e| e.to_string())?;
    let probe: Vec<f64> = serde_json::from_str(probe_json).map_err(|e| e.to_string())?;
    if probe.len() != 3 {
        return Err("probe context needs 3 components".into());
    }
    if !(alpha >= 0.0 && lambda >= 0.0) {
        return Err("alpha and lambda must be non-negative".into());
    }
    let costs = CostTable::default();
    let params = RewardParams { lambda_cost: lambda };
    let mut arms = vec![ArmState::new(3); 3];
    let mut prev = start_acc;
    let mut rewards = Vec::new();
    for (i, h) in history.iter().enumerate() {
        let bad = || format!("history entry {i} needs arm, x[3] and acc");
        let arm = h["arm"].as_u64().ok_or_else(bad)? as usize;
        let rule = RuleId::from_index(arm).ok_or_else(bad)?;
        let x: Vec<f64> = serde_json::from_value(h["x"].clone()).map_err(|_| bad())?;
        let acc = h["acc"].as_f64().ok_or_else(bad)?;
        if x.len() != 3 {
            return Err(bad());
        }
        let r = compute_reward(acc, prev, rule, &costs, &params);
        arms[arm].update(&x, r);
        rewards.push(r);
        prev = acc;
    }
    let sel = select_arm(&arms, &probe, alpha, history.len()).map_err(|e| e.to_string())?;
    let thetas: Vec<Vec<f64>> = arms.iter().map(|a| a.theta().unwrap_or_default()).collect();
    Ok(json!({
        "rewards": rewards,
        "ucb": sel.scores,
        "choice": RuleId::from_index(sel.arm).map(RuleId::name),
        "theta": thetas,
    })
    .to_string())
}

#[wasm_bindgen(js_name = exploreController)]
pub fn explore_controller_js(
    history_json: &str,
    start_acc: f64,
    lambda: f64,
    alpha: f64,
    probe_json: &str,
) -> Result<String, JsError> {
    explore_controller(history_json, start_acc, lambda, alpha, probe_json).map_err(|e| JsError::new(&e))
}
