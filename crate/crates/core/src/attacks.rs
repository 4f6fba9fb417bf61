//! Model-poisoning transforms applied by malicious clients to their honest update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::UpdateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    None,
    /// Loud: the honest direction scaled by a large factor.
    Standard,
    /// Norm-matched to the round's mean benign norm.
    Stealth,
}

/// Where a stealth attacker takes its target norm from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormSource {
    /// The true norms of the round's benign clients (simulator knowledge).
    #[default]
    BenignOracle,
    /// The attacker's own honest norm.
    SelfEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub kind: AttackKind,
    pub scale_factor: f64,
    /// `None` picks the per-kind default: off for standard, on for stealth.
    pub sign_flip: Option<bool>,
    pub norm_source: NormSource,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            kind: AttackKind::None,
            scale_factor: 5.0,
            sign_flip: None,
            norm_source: NormSource::BenignOracle,
        }
    }
}

impl AttackConfig {
    pub fn standard() -> Self {
        Self {
            kind: AttackKind::Standard,
            ..Self::default()
        }
    }

    pub fn stealth() -> Self {
        Self {
            kind: AttackKind::Stealth,
            ..Self::default()
        }
    }

    pub fn flips_sign(&self) -> bool {
        self.sign_flip
            .unwrap_or(matches!(self.kind, AttackKind::Stealth))
    }

    fn sign(&self) -> f64 {
        if self.flips_sign() {
            -1.0
        } else {
            1.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_factor > 0.0 && self.scale_factor.is_finite()) {
            return Err(Error::config("attack.scale_factor", "must be positive"));
        }
        Ok(())
    }
}

/// `±scale_factor · honest`.
pub fn standard_poison(honest: &UpdateVector, cfg: &AttackConfig) -> UpdateVector {
    honest.scaled(cfg.sign() * cfg.scale_factor)
}

/// Rescales the (optionally flipped) honest direction so that its L2 norm
/// equals the mean of `benign_norms`.
///
/// A zero honest update has no direction; the normalised all-ones vector is
/// used instead.
pub fn stealth_poison(
    honest: &UpdateVector,
    benign_norms: &[f64],
    cfg: &AttackConfig,
) -> Result<UpdateVector> {
    if benign_norms.is_empty() {
        return Err(Error::InvalidArgument(
            "stealth attack needs at least one benign norm".into(),
        ));
    }
    if honest.is_empty() {
        return Err(Error::InvalidArgument("empty update".into()));
    }
    let target = benign_norms.iter().sum::<f64>() / benign_norms.len() as f64;
    let norm = honest.norm();
    let direction = if norm > 0.0 {
        honest.scaled(1.0 / norm)
    } else {
        log::warn!("stealth attacker has a zero honest update; using the all-ones direction");
        let d = honest.len() as f64;
        UpdateVector::new(vec![1.0 / d.sqrt(); honest.len()])
    };
    Ok(direction.scaled(cfg.sign() * target))
}

/// Dispatches on `cfg.kind`. `benign_norms` is only read by the stealth attack.
pub fn poison(
    honest: &UpdateVector,
    benign_norms: &[f64],
    cfg: &AttackConfig,
) -> Result<UpdateVector> {
    match cfg.kind {
        AttackKind::None => Ok(honest.clone()),
        AttackKind::Standard => Ok(standard_poison(honest, cfg)),
        AttackKind::Stealth => match cfg.norm_source {
            NormSource::BenignOracle => stealth_poison(honest, benign_norms, cfg),
            NormSource::SelfEstimate => stealth_poison(honest, &[honest.norm()], cfg),
        },
    }
}
