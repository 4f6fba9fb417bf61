//! Federated training under model poisoning, with a LinUCB controller that
//! picks the aggregation rule every round from cheap update diagnostics.
//!
//! The crate is a deterministic single-process simulator. Modules follow the
//! round pipeline: [`data`] and [`model`] on the client side, [`attacks`] for
//! malicious clients, then [`diagnostics`], [`bandit`] and [`aggregation`] on
//! the server, tied together by [`orchestrator`].

pub mod aggregation;
pub mod attacks;
pub mod bandit;
pub mod config;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod orchestrator;
pub mod report;
pub mod rng;

pub use aggregation::{coordinate_wise_median, fed_avg, krum, KrumConfig, RuleId};
pub use attacks::{AttackConfig, AttackKind};
pub use bandit::{compute_reward, select_arm, update_arm, ArmState, BanditConfig, CostTable, LinUcb, RewardParams};
pub use config::{ScenarioConfig, Strategy};
pub use data::{Dataset, Partition, PartitionConfig};
pub use diagnostics::{compute_state, StateVector};
pub use error::{Error, Result};
pub use model::{Architecture, ModelParams, TrainConfig, UpdateVector};
pub use orchestrator::{run_scenario, RoundLog, ScenarioReport, Simulation, Summary};
