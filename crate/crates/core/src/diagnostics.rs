//! Per-round diagnostics over the collected client updates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::UpdateVector;

/// The three-component context observed by the controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    /// Population variance of the clients' L2 norms.
    pub norm_variance: f64,
    /// Mean cosine similarity over all unordered client pairs.
    pub avg_cosine_similarity: f64,
    /// L2 norm of the mean update.
    pub mean_update_norm: f64,
}

impl StateVector {
    pub fn to_array(self) -> [f64; 3] {
        [
            self.norm_variance,
            self.avg_cosine_similarity,
            self.mean_update_norm,
        ]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn compute_state(updates: &[UpdateVector]) -> Result<StateVector> {
    let n = updates.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "diagnostics need at least two updates, got {n}"
        )));
    }
    let d = updates[0].len();
    if let Some(u) = updates.iter().find(|u| u.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: u.len(),
        });
    }

    let norms: Vec<f64> = updates.iter().map(UpdateVector::norm).collect();
    let mean_norm = norms.iter().sum::<f64>() / n as f64;
    let norm_variance = norms
        .iter()
        .map(|v| (v - mean_norm) * (v - mean_norm))
        .sum::<f64>()
        / n as f64;

    let mut cos_sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            // Zero vectors have no direction and count as orthogonal.
            if norms[i] > 0.0 && norms[j] > 0.0 {
                let c = dot(&updates[i].delta, &updates[j].delta) / (norms[i] * norms[j]);
                cos_sum += c.clamp(-1.0, 1.0);
            }
        }
    }
    let avg_cosine_similarity = cos_sum / (n * (n - 1) / 2) as f64;

    let mut mean = vec![0.0; d];
    for u in updates {
        mean.iter_mut().zip(&u.delta).for_each(|(m, v)| *m += v);
    }
    let mean_update_norm = mean.iter().map(|m| m * m).sum::<f64>().sqrt() / n as f64;

    Ok(StateVector {
        norm_variance,
        avg_cosine_similarity,
        mean_update_norm,
    })
}

/// How the raw state is mapped to the controller's context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ContextScaling {
    /// Scale-free ratios, see [`ratio_context`].
    #[default]
    Ratio,
    /// Running min-max over the rounds seen so far ([`MinMaxScaler`]).
    MinMax,
    /// The raw state, unscaled.
    Raw,
}

/// Mean L2 norm of the individual updates.
pub fn mean_client_norm(updates: &[UpdateVector]) -> f64 {
    if updates.is_empty() {
        return 0.0;
    }
    updates.iter().map(UpdateVector::norm).sum::<f64>() / updates.len() as f64
}

/// Maps the state to `[0, 1]³` without reference to past rounds:
///
/// * `cv² / (1 + cv²)` where `cv²` is the norm variance over the squared mean client norm;
/// * `(cos + 1) / 2`;
/// * mean-update norm over mean client norm (at most 1 by the triangle inequality).
///
/// All three are invariant to a common rescaling of the updates.
pub fn ratio_context(state: &StateVector, mean_client_norm: f64) -> [f64; 3] {
    if !(mean_client_norm > 0.0) {
        return [0.0, 0.5 * (state.avg_cosine_similarity + 1.0), 0.0];
    }
    let cv2 = state.norm_variance / (mean_client_norm * mean_client_norm);
    [
        (cv2 / (1.0 + cv2)).clamp(0.0, 1.0),
        (0.5 * (state.avg_cosine_similarity + 1.0)).clamp(0.0, 1.0),
        (state.mean_update_norm / mean_client_norm).clamp(0.0, 1.0),
    ]
}

/// Online min-max scaler mapping each component into `[0, 1]`.
///
/// Each observation first widens the running range and is then scaled by it.
/// A component whose range is still degenerate passes through unchanged
/// (clamped), which is what happens on the first round.
#[derive(Debug, Clone, Default)]
pub struct MinMaxScaler {
    bounds: Option<([f64; 3], [f64; 3])>,
}

impl MinMaxScaler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe_and_scale(&mut self, raw: [f64; 3]) -> [f64; 3] {
        let (lo, hi) = self.bounds.get_or_insert((raw, raw));
        let mut out = [0.0; 3];
        for k in 0..3 {
            lo[k] = lo[k].min(raw[k]);
            hi[k] = hi[k].max(raw[k]);
            let range = hi[k] - lo[k];
            let v = if range > 0.0 {
                (raw[k] - lo[k]) / range
            } else {
                raw[k]
            };
            out[k] = v.clamp(0.0, 1.0);
        }
        out
    }
}
