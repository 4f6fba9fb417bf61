//! The aggregation arsenal: FedAvg, coordinate-wise median and Krum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::UpdateVector;

/// An aggregation rule; the integer value doubles as the bandit arm index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleId {
    FedAvg = 0,
    Median = 1,
    Krum = 2,
}

impl RuleId {
    pub const ALL: [RuleId; 3] = [RuleId::FedAvg, RuleId::Median, RuleId::Krum];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<RuleId> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleId::FedAvg => "fedavg",
            RuleId::Median => "median",
            RuleId::Krum => "krum",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fedavg" | "0" => Ok(RuleId::FedAvg),
            "median" | "1" => Ok(RuleId::Median),
            "krum" | "2" => Ok(RuleId::Krum),
            other => Err(Error::InvalidArgument(format!("unknown rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KrumConfig {
    /// Assumed number of Byzantine clients.
    pub f: usize,
}

impl KrumConfig {
    /// Neighbour count `N - f - 2`, or an error when it would be below one.
    pub fn neighbours(&self, n: usize) -> Result<usize> {
        if n < self.f + 3 {
            return Err(Error::KrumTooFewClients { n, f: self.f });
        }
        Ok(n - self.f - 2)
    }
}

fn check_shapes(updates: &[UpdateVector]) -> Result<usize> {
    let first = updates.first().ok_or(Error::EmptyUpdates)?;
    let d = first.len();
    for u in &updates[1..] {
        if u.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.len(),
            });
        }
    }
    Ok(d)
}

pub fn fed_avg(updates: &[UpdateVector]) -> Result<UpdateVector> {
    let d = check_shapes(updates)?;
    let mut sum = vec![0.0; d];
    for u in updates {
        sum.iter_mut().zip(&u.delta).for_each(|(s, v)| *s += v);
    }
    let n = updates.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(UpdateVector::new(sum))
}

/// Per-coordinate median; even counts average the two middle values.
pub fn coordinate_wise_median(updates: &[UpdateVector]) -> Result<UpdateVector> {
    let d = check_shapes(updates)?;
    let n = updates.len();
    let mut column = vec![0.0; n];
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        for (c, u) in column.iter_mut().zip(updates) {
            *c = u.delta[j];
        }
        column.sort_unstable_by(f64::total_cmp);
        let mid = n / 2;
        out.push(if n % 2 == 1 {
            column[mid]
        } else {
            0.5 * (column[mid - 1] + column[mid])
        });
    }
    Ok(UpdateVector::new(out))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Krum scores: for every client, the sum of its `k` smallest squared
/// distances to the other clients.
pub fn krum_scores(updates: &[UpdateVector], cfg: &KrumConfig) -> Result<Vec<f64>> {
    check_shapes(updates)?;
    let n = updates.len();
    let k = cfg.neighbours(n)?;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = squared_distance(&updates[i].delta, &updates[j].delta);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut row = Vec::with_capacity(n - 1);
    Ok((0..n)
        .map(|i| {
            row.clear();
            row.extend((0..n).filter(|&j| j != i).map(|j| dist[i * n + j]));
            row.sort_unstable_by(f64::total_cmp);
            row[..k].iter().sum()
        })
        .collect())
}

/// Selects the single update with the lowest Krum score (lowest index on ties).
pub fn krum(updates: &[UpdateVector], cfg: &KrumConfig) -> Result<(UpdateVector, usize)> {
    let scores = krum_scores(updates, cfg)?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] {
            best = i;
        }
    }
    Ok((updates[best].clone(), best))
}

/// Applies `rule`; the second element is Krum's selected client.
pub fn aggregate(
    rule: RuleId,
    updates: &[UpdateVector],
    krum_cfg: &KrumConfig,
) -> Result<(UpdateVector, Option<usize>)> {
    match rule {
        RuleId::FedAvg => fed_avg(updates).map(|u| (u, None)),
        RuleId::Median => coordinate_wise_median(updates).map(|u| (u, None)),
        RuleId::Krum => krum(updates, krum_cfg).map(|(u, i)| (u, Some(i))),
    }
}
