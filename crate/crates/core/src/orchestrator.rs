//! The server-side round loop.
//!
//! Each round: broadcast the global model, collect client deltas (malicious
//! clients poison theirs), compute diagnostics, choose a rule, apply the
//! aggregate, evaluate, reward the controller and log.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate, KrumConfig, RuleId};
use crate::attacks::{poison, AttackKind};
use crate::bandit::{compute_reward, LinUcb};
use crate::config::{ScenarioConfig, Strategy};
use crate::data::{dirichlet_partition, generate_synthetic, holdout_split, Dataset, Partition, PartitionConfig};
use crate::diagnostics::{compute_state, mean_client_norm, ratio_context, ContextScaling, MinMaxScaler, StateVector};
use crate::error::{Error, Result};
use crate::model::{evaluate, init_model, local_train, ModelParams, UpdateVector};
use crate::rng::{derive_seed, stream_rng, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub round: usize,
    pub chosen_rule: RuleId,
    pub state: StateVector,
    pub scaled_state: [f64; 3],
    pub val_accuracy: f64,
    pub test_accuracy: f64,
    pub reward: f64,
    /// Per-arm UCB scores; `None` for static strategies.
    pub ucb_scores: Option<[f64; 3]>,
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPct {
    pub fedavg: f64,
    pub median: f64,
    pub krum: f64,
}

impl SelectionPct {
    pub fn get(&self, rule: RuleId) -> f64 {
        match rule {
            RuleId::FedAvg => self.fedavg,
            RuleId::Median => self.median,
            RuleId::Krum => self.krum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub label: String,
    pub strategy: String,
    pub rounds: usize,
    /// Test accuracy after the last round.
    pub final_accuracy: f64,
    pub final_val_accuracy: f64,
    /// Population standard deviation of test accuracy over the last 10 rounds.
    pub std_last10: f64,
    pub selection_pct: SelectionPct,
    /// Mean heuristic cost of the rules played.
    pub mean_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub config: ScenarioConfig,
    pub rounds: Vec<RoundLog>,
    pub summary: Summary,
}

/// Everything a run needs between rounds.
pub struct Simulation {
    cfg: ScenarioConfig,
    train: Dataset,
    proxy: Dataset,
    test: Dataset,
    partition: Partition,
    malicious: Vec<bool>,
    global: ModelParams,
    bandit: Option<LinUcb>,
    scaler: MinMaxScaler,
    prev_accuracy: f64,
    round: usize,
}

impl Simulation {
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let d = &cfg.data;
        let full = generate_synthetic(
            d.num_classes,
            d.num_features,
            d.samples_per_class,
            d.class_separation,
            cfg.seed,
        )?;
        let (pool, test) = holdout_split(&full, d.test_fraction, derive_seed(cfg.seed, Stream::Holdout, &[0]))?;
        let (train, proxy) = holdout_split(&pool, d.holdout_fraction, derive_seed(cfg.seed, Stream::Holdout, &[1]))?;
        let partition = dirichlet_partition(
            &train,
            &PartitionConfig {
                beta: cfg.partition.beta,
                num_clients: cfg.num_clients,
                seed: cfg.seed,
            },
        )?;

        let mut ids: Vec<usize> = (0..cfg.num_clients).collect();
        ids.shuffle(&mut stream_rng(cfg.seed, Stream::Attackers, &[]));
        let mut malicious = vec![false; cfg.num_clients];
        if cfg.attack.kind != AttackKind::None {
            for &i in &ids[..cfg.num_malicious] {
                malicious[i] = true;
            }
        }

        let global = init_model(cfg.architecture(), cfg.seed)?;
        let prev_accuracy = evaluate(&global, &proxy);
        let bandit = matches!(cfg.strategy, Strategy::Adaptive).then(|| LinUcb::new(cfg.bandit));
        Ok(Self {
            cfg,
            train,
            proxy,
            test,
            partition,
            malicious,
            global,
            bandit,
            scaler: MinMaxScaler::new(),
            prev_accuracy,
            round: 0,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn global_model(&self) -> &ModelParams {
        &self.global
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn train_set(&self) -> &Dataset {
        &self.train
    }

    pub fn malicious(&self) -> &[bool] {
        &self.malicious
    }

    pub fn bandit(&self) -> Option<&LinUcb> {
        self.bandit.as_ref()
    }

    pub fn rounds_completed(&self) -> usize {
        self.round
    }

    fn train_client(&self, client: usize) -> Result<UpdateVector> {
        let seed = derive_seed(self.cfg.seed, Stream::LocalTrain, &[client as u64, self.round as u64]);
        local_train(
            &self.global,
            &self.train,
            &self.partition.assignments[client],
            &self.cfg.train,
            seed,
        )
        .map_err(|e| match e {
            Error::NonFinite => Error::Divergence {
                client,
                round: self.round,
            },
            other => other,
        })
    }

    /// Honest local training for every client, in client order.
    fn honest_updates(&self) -> Result<Vec<UpdateVector>> {
        let n = self.cfg.num_clients;
        #[cfg(feature = "parallel")]
        let results: Vec<Result<UpdateVector>> =
            (0..n).into_par_iter().map(|c| self.train_client(c)).collect();
        #[cfg(not(feature = "parallel"))]
        let results: Vec<Result<UpdateVector>> = (0..n).map(|c| self.train_client(c)).collect();
        results.into_iter().collect()
    }

    /// The updates the server receives this round.
    pub fn collect_updates(&self) -> Result<Vec<UpdateVector>> {
        let honest = self.honest_updates()?;
        if self.cfg.attack.kind == AttackKind::None {
            return Ok(honest);
        }
        let benign_norms: Vec<f64> = honest
            .iter()
            .zip(&self.malicious)
            .filter(|(_, &bad)| !bad)
            .map(|(u, _)| u.norm())
            .collect();
        honest
            .into_iter()
            .zip(&self.malicious)
            .map(|(u, &bad)| {
                if bad {
                    poison(&u, &benign_norms, &self.cfg.attack)
                } else {
                    Ok(u)
                }
            })
            .collect()
    }

    pub fn run_round(&mut self) -> Result<RoundLog> {
        #[cfg(not(target_arch = "wasm32"))]
        let started = self.cfg.log_wall_time.then(std::time::Instant::now);

        let updates = self.collect_updates()?;
        let state = compute_state(&updates)?;
        // Finite but huge updates overflow the norms before anything else notices.
        if state.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::StateOverflow { round: self.round });
        }
        let scaled_state = match self.cfg.bandit.context_scaling {
            ContextScaling::Ratio => ratio_context(&state, mean_client_norm(&updates)),
            ContextScaling::MinMax => self.scaler.observe_and_scale(state.to_array()),
            ContextScaling::Raw => state.to_array(),
        };

        let (rule, ucb_scores) = match (&self.cfg.strategy, &self.bandit) {
            (Strategy::Static(rule), _) => (*rule, None),
            (Strategy::Adaptive, Some(bandit)) => {
                let sel = bandit.select(&scaled_state, self.round)?;
                let rule = RuleId::from_index(sel.arm).expect("one arm per rule");
                (rule, Some([sel.scores[0], sel.scores[1], sel.scores[2]]))
            }
            (Strategy::Adaptive, None) => unreachable!("adaptive runs own a bandit"),
        };

        let krum_cfg = KrumConfig {
            f: self.cfg.krum_f(),
        };
        let (delta, _) = aggregate(rule, &updates, &krum_cfg)?;
        self.global.apply(&delta);
        if !self.global.is_finite() {
            return Err(Error::GlobalDivergence { round: self.round });
        }

        let val_accuracy = evaluate(&self.global, &self.proxy);
        let test_accuracy = evaluate(&self.global, &self.test);
        let reward = compute_reward(
            val_accuracy,
            self.prev_accuracy,
            rule,
            &self.cfg.costs,
            &self.cfg.reward,
        );
        if let Some(bandit) = self.bandit.as_mut() {
            bandit.update(rule.index(), &scaled_state, reward);
        }
        self.prev_accuracy = val_accuracy;

        #[cfg(not(target_arch = "wasm32"))]
        let wall_time_ms = started.map(|t| t.elapsed().as_secs_f64() * 1e3);
        #[cfg(target_arch = "wasm32")]
        let wall_time_ms = None;

        let log = RoundLog {
            round: self.round,
            chosen_rule: rule,
            state,
            scaled_state,
            val_accuracy,
            test_accuracy,
            reward,
            ucb_scores,
            wall_time_ms,
        };
        self.round += 1;
        Ok(log)
    }
}

pub fn summarize(cfg: &ScenarioConfig, rounds: &[RoundLog]) -> Summary {
    let last = rounds.last();
    let tail = &rounds[rounds.len().saturating_sub(10)..];
    let tail_mean = tail.iter().map(|r| r.test_accuracy).sum::<f64>() / tail.len().max(1) as f64;
    let std_last10 = (tail
        .iter()
        .map(|r| (r.test_accuracy - tail_mean).powi(2))
        .sum::<f64>()
        / tail.len().max(1) as f64)
        .sqrt();
    let n = rounds.len().max(1) as f64;
    let pct = |rule: RuleId| {
        100.0 * rounds.iter().filter(|r| r.chosen_rule == rule).count() as f64 / n
    };
    Summary {
        label: cfg.label.clone(),
        strategy: cfg.strategy.to_string(),
        rounds: rounds.len(),
        final_accuracy: last.map_or(0.0, |r| r.test_accuracy),
        final_val_accuracy: last.map_or(0.0, |r| r.val_accuracy),
        std_last10,
        selection_pct: SelectionPct {
            fedavg: pct(RuleId::FedAvg),
            median: pct(RuleId::Median),
            krum: pct(RuleId::Krum),
        },
        mean_cost: rounds
            .iter()
            .map(|r| cfg.costs.cost(r.chosen_rule))
            .sum::<f64>()
            / n,
    }
}

/// Runs all configured rounds.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut sim = Simulation::new(cfg.clone())?;
    let rounds = (0..cfg.rounds)
        .map(|_| sim.run_round())
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(cfg, &rounds);
    Ok(ScenarioReport {
        config: cfg.clone(),
        rounds,
        summary,
    })
}
