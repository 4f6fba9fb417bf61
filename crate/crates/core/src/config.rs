//! Declarative scenario description, parsed from JSON.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregation::RuleId;
use crate::attacks::AttackConfig;
use crate::bandit::{BanditConfig, CostTable, RewardParams};
use crate::error::{Error, Result};
use crate::model::{Architecture, TrainConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    Static(RuleId),
    Adaptive,
}

impl Strategy {
    pub fn uses_krum(self) -> bool {
        matches!(self, Strategy::Adaptive | Strategy::Static(RuleId::Krum))
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Static(r) => write!(f, "{r}"),
            Strategy::Adaptive => f.write_str("adaptive"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("adaptive") {
            return Ok(Strategy::Adaptive);
        }
        s.parse::<RuleId>()
            .map(Strategy::Static)
            .map_err(|_| Error::config("strategy", format!("unknown strategy `{s}`")))
    }
}

impl TryFrom<String> for Strategy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub num_classes: usize,
    pub num_features: usize,
    pub samples_per_class: usize,
    pub class_separation: f64,
    /// Fraction of all samples reserved for the reported test accuracy.
    pub test_fraction: f64,
    /// Fraction of the remainder held by the server as the reward's proxy set.
    pub holdout_fraction: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            num_classes: 10,
            num_features: 20,
            samples_per_class: 300,
            class_separation: 3.0,
            test_fraction: 0.2,
            holdout_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ModelConfig {
    /// Hidden width of a tanh MLP; absent means softmax regression.
    pub hidden: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionSettings {
    pub beta: f64,
}

impl Default for PartitionSettings {
    fn default() -> Self {
        Self { beta: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub label: String,
    pub seed: u64,
    pub num_clients: usize,
    pub num_malicious: usize,
    pub rounds: usize,
    pub data: DataConfig,
    pub model: ModelConfig,
    pub partition: PartitionSettings,
    pub train: TrainConfig,
    pub attack: AttackConfig,
    pub strategy: Strategy,
    /// Krum's assumed Byzantine count; defaults to `num_malicious`.
    pub krum_f: Option<usize>,
    pub bandit: BanditConfig,
    pub costs: CostTable,
    pub reward: RewardParams,
    /// Fill the `wall_time_ms` column. Off by default so logs stay byte-reproducible.
    pub log_wall_time: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            label: "scenario".into(),
            seed: 0,
            num_clients: 20,
            num_malicious: 5,
            rounds: 50,
            data: DataConfig::default(),
            model: ModelConfig::default(),
            partition: PartitionSettings::default(),
            train: TrainConfig::default(),
            attack: AttackConfig::default(),
            strategy: Strategy::Adaptive,
            krum_f: None,
            bandit: BanditConfig::default(),
            costs: CostTable::default(),
            reward: RewardParams::default(),
            log_wall_time: false,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config {
            field: "<document>".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn krum_f(&self) -> usize {
        self.krum_f.unwrap_or(self.num_malicious)
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            num_features: self.data.num_features,
            num_classes: self.data.num_classes,
            hidden: self.model.hidden,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.label.is_empty()
            || !self
                .label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.=".contains(c))
        {
            return Err(Error::config(
                "label",
                "must be non-empty and use only [A-Za-z0-9-_.=]",
            ));
        }
        if self.num_clients < 2 {
            return Err(Error::config("num_clients", "must be at least 2"));
        }
        if self.num_malicious >= self.num_clients {
            return Err(Error::config(
                "num_malicious",
                format!("must be below num_clients ({})", self.num_clients),
            ));
        }
        if self.rounds == 0 {
            return Err(Error::config("rounds", "must be at least 1"));
        }
        if self.strategy.uses_krum() && self.num_clients < self.krum_f() + 3 {
            return Err(Error::config(
                if self.krum_f.is_some() { "krum_f" } else { "num_malicious" },
                format!(
                    "Krum needs N >= f + 3, got N = {} and f = {}",
                    self.num_clients,
                    self.krum_f()
                ),
            ));
        }
        let d = &self.data;
        if d.num_classes == 0 || d.num_features == 0 || d.samples_per_class == 0 {
            return Err(Error::config("data", "class, feature and sample counts must be positive"));
        }
        if !(d.class_separation > 0.0 && d.class_separation.is_finite()) {
            return Err(Error::config("data.class_separation", "must be positive"));
        }
        for (name, v) in [
            ("data.test_fraction", d.test_fraction),
            ("data.holdout_fraction", d.holdout_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::config(name, "must lie in (0, 1)"));
            }
        }
        let train_samples = (d.num_classes * d.samples_per_class) as f64
            * (1.0 - d.test_fraction)
            * (1.0 - d.holdout_fraction);
        if train_samples < self.num_clients as f64 {
            return Err(Error::config(
                "data.samples_per_class",
                "too few training samples to give every client one",
            ));
        }
        if self.model.hidden == Some(0) {
            return Err(Error::config("model.hidden", "must be positive when present"));
        }
        if !(self.partition.beta > 0.0 && self.partition.beta.is_finite()) {
            return Err(Error::config("partition.beta", "must be positive"));
        }
        self.train.validate()?;
        self.attack.validate()?;
        self.bandit.validate()?;
        self.costs.validate()?;
        if !(self.reward.lambda_cost >= 0.0 && self.reward.lambda_cost.is_finite()) {
            return Err(Error::config("reward.lambda_cost", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_carry_reference_hyperparameters() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        assert_eq!((cfg.num_clients, cfg.num_malicious), (20, 5));
        assert_eq!(cfg.bandit.alpha, 1.5);
        assert_eq!(cfg.train.learning_rate, 0.001);
        assert_eq!(cfg.train.momentum, 0.9);
        assert_eq!(cfg.train.batch_size, 32);
        assert_eq!(cfg.train.epochs, 1);
        assert_eq!(cfg.attack.scale_factor, 5.0);
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = ScenarioConfig::default();
        cfg.strategy = Strategy::Static(RuleId::Median);
        cfg.krum_f = Some(3);
        cfg.model.hidden = Some(16);
        let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn minimal_document_uses_defaults() {
        let cfg = ScenarioConfig::from_json(r#"{"schema_version": 1, "strategy": "krum"}"#).unwrap();
        assert_eq!(cfg.strategy, Strategy::Static(RuleId::Krum));
        assert_eq!(cfg.rounds, 50);
    }

    #[test]
    fn krum_precondition_names_the_rule() {
        let cfg = ScenarioConfig {
            num_malicious: 18,
            ..ScenarioConfig::default()
        };
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("N >= f + 3"), "{err}");
        // FedAvg alone does not care.
        let ok = ScenarioConfig {
            strategy: Strategy::Static(RuleId::FedAvg),
            ..cfg
        };
        ok.validate().unwrap();
    }

    #[test]
    fn field_errors_are_precise() {
        let bad = [
            r#"{"rounds": 0}"#,
            r#"{"num_malicious": 20}"#,
            r#"{"partition": {"beta": -1}}"#,
            r#"{"costs": {"krum": 1.5}}"#,
            r#"{"schema_version": 9}"#,
            r#"{"strategy": "trimmed"}"#,
            r#"{"unknown_key": 1}"#,
        ];
        for doc in bad {
            assert!(
                matches!(ScenarioConfig::from_json(doc), Err(Error::Config { .. })),
                "{doc}"
            );
        }
    }
}
