//! Synthetic labeled data and client partitioning.
//!
//! The data is a Gaussian-blob classification task: every class owns a mean
//! vector and its samples are drawn around it with unit covariance. Clients
//! receive shards whose label mix is controlled by a Dirichlet concentration.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Row-major feature matrix plus integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    num_features: usize,
    num_classes: usize,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        num_features: usize,
        num_classes: usize,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("dataset has no samples".into()));
        }
        if num_features == 0 || num_classes == 0 {
            return Err(Error::InvalidArgument(
                "feature and class counts must be positive".into(),
            ));
        }
        if features.len() != labels.len() * num_features {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * num_features,
                got: features.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside [0, {num_classes})"
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite feature value".into()));
        }
        Ok(Self {
            features,
            labels,
            num_features,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.features[i * self.num_features..(i + 1) * self.num_features]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Copies the given rows, in the given order, into a new dataset.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.num_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            labels,
            num_features: self.num_features,
            num_classes: self.num_classes,
        }
    }

    /// Sample indices grouped by class.
    pub fn indices_by_class(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Draws a Gaussian-blob dataset.
///
/// When `num_classes <= num_features` the class means are orthogonal and sit
/// at pairwise distance exactly `class_separation`; otherwise they point in
/// random directions at radius `class_separation / sqrt(2)`. Samples are
/// stored class by class.
pub fn generate_synthetic(
    num_classes: usize,
    num_features: usize,
    samples_per_class: usize,
    class_separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if num_classes == 0 || num_features == 0 || samples_per_class == 0 {
        return Err(Error::InvalidArgument(
            "class, feature and sample counts must be positive".into(),
        ));
    }
    if !(class_separation > 0.0 && class_separation.is_finite()) {
        return Err(Error::InvalidArgument(
            "class_separation must be positive".into(),
        ));
    }

    let mut rng = stream_rng(seed, Stream::Data, &[]);
    let radius = class_separation / std::f64::consts::SQRT_2;
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(num_classes);
    let orthogonal = num_classes <= num_features;
    for _ in 0..num_classes {
        // Rejection loop only triggers on a degenerate (numerically dependent) draw.
        loop {
            let mut v: Vec<f64> = (0..num_features)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            if orthogonal {
                for m in &means {
                    let proj = dot(&v, m) / dot(m, m);
                    v.iter_mut().zip(m).for_each(|(a, b)| *a -= proj * b);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 1e-6 {
                v.iter_mut().for_each(|a| *a *= radius / norm);
                means.push(v);
                break;
            }
        }
    }

    let n = num_classes * samples_per_class;
    let mut features = Vec::with_capacity(n * num_features);
    let mut labels = Vec::with_capacity(n);
    for (class, mean) in means.iter().enumerate() {
        for _ in 0..samples_per_class {
            for &m in mean {
                features.push(m + rng.sample::<f64, _>(StandardNormal));
            }
            labels.push(class);
        }
    }
    Dataset::new(features, labels, num_features, num_classes)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    /// Dirichlet concentration; small values give clients few classes.
    pub beta: f64,
    pub num_clients: usize,
    pub seed: u64,
}

/// Per-client index lists into the partitioned dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub assignments: Vec<Vec<usize>>,
}

impl Partition {
    pub fn num_clients(&self) -> usize {
        self.assignments.len()
    }

    /// Shannon entropy (nats) of each client's label distribution.
    pub fn label_entropies(&self, ds: &Dataset) -> Vec<f64> {
        self.assignments
            .iter()
            .map(|idx| {
                let mut counts = vec![0usize; ds.num_classes()];
                for &i in idx {
                    counts[ds.label(i)] += 1;
                }
                let total = idx.len() as f64;
                counts
                    .iter()
                    .filter(|&&c| c > 0)
                    .map(|&c| {
                        let p = c as f64 / total;
                        -p * p.ln()
                    })
                    .sum()
            })
            .collect()
    }
}

/// Splits `total` items by `weights` using largest-remainder rounding.
/// Ties in the fractional part go to the lower index.
fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights
        .iter()
        .map(|w| w / sum * total as f64)
        .collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Allots every sample of `ds` to one of `cfg.num_clients` clients, drawing
/// per-class client proportions from `Dirichlet(beta, ..., beta)`.
pub fn dirichlet_partition(ds: &Dataset, cfg: &PartitionConfig) -> Result<Partition> {
    if !(cfg.beta > 0.0 && cfg.beta.is_finite()) {
        return Err(Error::InvalidArgument("beta must be positive".into()));
    }
    let n_clients = cfg.num_clients;
    if n_clients == 0 {
        return Err(Error::InvalidArgument("num_clients must be positive".into()));
    }
    if n_clients > ds.len() {
        return Err(Error::DatasetTooSmall {
            samples: ds.len(),
            clients: n_clients,
        });
    }

    let gamma = Gamma::new(cfg.beta, 1.0)
        .map_err(|e| Error::InvalidArgument(format!("gamma({}): {e}", cfg.beta)))?;
    let mut rng = stream_rng(cfg.seed, Stream::Partition, &[]);
    let mut assignments = vec![Vec::new(); n_clients];

    for mut members in ds.indices_by_class() {
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let mut weights: Vec<f64> = (0..n_clients).map(|_| gamma.sample(&mut rng)).collect();
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            // All draws underflowed: the beta -> 0 limit puts the class on one client.
            let owner = rng.random_range(0..n_clients);
            weights.iter_mut().for_each(|w| *w = 0.0);
            weights[owner] = 1.0;
        }
        let counts = largest_remainder(&weights, members.len());
        let mut start = 0;
        for (client, &c) in counts.iter().enumerate() {
            assignments[client].extend_from_slice(&members[start..start + c]);
            start += c;
        }
    }

    // Every client must produce an update, so empty shards borrow one sample
    // from the currently largest client.
    while let Some(empty) = assignments.iter().position(|a| a.is_empty()) {
        let donor = (0..n_clients)
            .max_by(|&a, &b| assignments[a].len().cmp(&assignments[b].len()).then(b.cmp(&a)))
            .expect("at least one client");
        let moved = assignments[donor].pop().expect("donor is non-empty");
        assignments[empty].push(moved);
    }
    for a in &mut assignments {
        a.sort_unstable();
    }
    Ok(Partition { assignments })
}

/// Stratified split into `(rest, holdout)`, where `holdout` receives about
/// `fraction` of the samples of every class.
pub fn holdout_split(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "holdout fraction {fraction} outside (0, 1)"
        )));
    }
    let by_class = ds.indices_by_class();
    let present: Vec<usize> = (0..by_class.len())
        .filter(|&k| !by_class[k].is_empty())
        .collect();
    let weights: Vec<f64> = present.iter().map(|&k| by_class[k].len() as f64).collect();
    let target = (ds.len() as f64 * fraction).round() as usize;
    let holdout_counts = largest_remainder(&weights, target);

    let mut rng = stream_rng(seed, Stream::Holdout, &[]);
    let mut rest = Vec::new();
    let mut held = Vec::new();
    for (&class, &h) in present.iter().zip(&holdout_counts) {
        let n = by_class[class].len();
        if h == 0 || h == n {
            return Err(Error::EmptyClass { class });
        }
        let mut members = by_class[class].clone();
        members.shuffle(&mut rng);
        held.extend_from_slice(&members[..h]);
        rest.extend_from_slice(&members[h..]);
    }
    rest.sort_unstable();
    held.sort_unstable();
    Ok((ds.subset(&rest), ds.subset(&held)))
}
