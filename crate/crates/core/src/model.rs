//! Client-side model, local SGD and accuracy evaluation.
//!
//! Parameters live in one flat vector so that updates can be averaged,
//! median-filtered and compared as plain vectors. Layout:
//!
//! * linear softmax model: `W[class][feature]` row-major, then `b[class]`;
//! * one-hidden-layer MLP (tanh): `W1[hidden][feature]`, `b1[hidden]`,
//!   `W2[class][hidden]`, `b2[class]`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub num_features: usize,
    pub num_classes: usize,
    pub hidden: Option<usize>,
}

impl Architecture {
    pub fn param_count(&self) -> usize {
        let (f, c) = (self.num_features, self.num_classes);
        match self.hidden {
            None => f * c + c,
            Some(h) => f * h + h + h * c + c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub arch: Architecture,
    pub flat: Vec<f64>,
}

/// One client's parameter delta for a round.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateVector {
    pub delta: Vec<f64>,
}

impl UpdateVector {
    pub fn new(delta: Vec<f64>) -> Self {
        Self { delta }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            delta: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.delta
    }

    pub fn norm(&self) -> f64 {
        self.delta.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> UpdateVector {
        UpdateVector {
            delta: self.delta.iter().map(|v| v * factor).collect(),
        }
    }
}

impl From<Vec<f64>> for UpdateVector {
    fn from(delta: Vec<f64>) -> Self {
        Self { delta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            momentum: 0.9,
            epochs: 1,
            batch_size: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("train.learning_rate", "must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config("train.momentum", "must lie in [0, 1)"));
        }
        if self.epochs == 0 {
            return Err(Error::config("train.epochs", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("train.batch_size", "must be positive"));
        }
        Ok(())
    }
}

impl ModelParams {
    pub fn zeros(arch: Architecture) -> Self {
        Self {
            arch,
            flat: vec![0.0; arch.param_count()],
        }
    }

    pub fn apply(&mut self, update: &UpdateVector) {
        debug_assert_eq!(self.flat.len(), update.len());
        self.flat
            .iter_mut()
            .zip(&update.delta)
            .for_each(|(w, d)| *w += d);
    }

    pub fn is_finite(&self) -> bool {
        self.flat.iter().all(|v| v.is_finite())
    }

    /// Class scores for one sample. `hidden_buf` must hold `hidden` entries
    /// (unused for the linear model).
    fn logits_into(&self, x: &[f64], hidden_buf: &mut [f64], out: &mut [f64]) {
        let Architecture {
            num_features: f,
            num_classes: c,
            hidden,
        } = self.arch;
        let p = &self.flat;
        match hidden {
            None => {
                let (w, b) = p.split_at(f * c);
                for k in 0..c {
                    out[k] = b[k] + dot(&w[k * f..(k + 1) * f], x);
                }
            }
            Some(h) => {
                let (w1, rest) = p.split_at(f * h);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(h * c);
                for j in 0..h {
                    hidden_buf[j] = (b1[j] + dot(&w1[j * f..(j + 1) * f], x)).tanh();
                }
                for k in 0..c {
                    out[k] = b2[k] + dot(&w2[k * h..(k + 1) * h], hidden_buf);
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut hidden = vec![0.0; self.arch.hidden.unwrap_or(0)];
        let mut logits = vec![0.0; self.arch.num_classes];
        self.logits_into(x, &mut hidden, &mut logits);
        argmax(&logits)
    }

    /// Mean cross-entropy over `indices` and its gradient (written to `grad`).
    pub fn loss_and_gradient(&self, ds: &Dataset, indices: &[usize], grad: &mut [f64]) -> f64 {
        let mut scratch = Scratch::new(self.arch);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for &i in indices {
            loss += self.accumulate_sample(ds.sample(i), ds.label(i), grad, &mut scratch);
        }
        let scale = 1.0 / indices.len() as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        loss * scale
    }

    /// Adds the cross-entropy gradient of one sample to `grad`; returns its loss.
    fn accumulate_sample(&self, x: &[f64], y: usize, grad: &mut [f64], s: &mut Scratch) -> f64 {
        let Architecture {
            num_features: f,
            num_classes: c,
            hidden,
        } = self.arch;
        self.logits_into(x, &mut s.hidden, &mut s.probs);
        let loss = softmax_in_place(&mut s.probs, y);
        // probs now holds dL/dlogits
        s.probs[y] -= 1.0;
        let dlogits = &s.probs;
        match hidden {
            None => {
                let (gw, gb) = grad.split_at_mut(f * c);
                for k in 0..c {
                    let d = dlogits[k];
                    gb[k] += d;
                    gw[k * f..(k + 1) * f]
                        .iter_mut()
                        .zip(x)
                        .for_each(|(g, xi)| *g += d * xi);
                }
            }
            Some(h) => {
                let w2 = &self.flat[f * h + h..f * h + h + h * c];
                let (gw1, rest) = grad.split_at_mut(f * h);
                let (gb1, rest) = rest.split_at_mut(h);
                let (gw2, gb2) = rest.split_at_mut(h * c);
                s.dhidden.iter_mut().for_each(|v| *v = 0.0);
                for k in 0..c {
                    let d = dlogits[k];
                    gb2[k] += d;
                    for j in 0..h {
                        gw2[k * h + j] += d * s.hidden[j];
                        s.dhidden[j] += d * w2[k * h + j];
                    }
                }
                for j in 0..h {
                    let dpre = s.dhidden[j] * (1.0 - s.hidden[j] * s.hidden[j]);
                    gb1[j] += dpre;
                    gw1[j * f..(j + 1) * f]
                        .iter_mut()
                        .zip(x)
                        .for_each(|(g, xi)| *g += dpre * xi);
                }
            }
        }
        loss
    }
}

struct Scratch {
    hidden: Vec<f64>,
    dhidden: Vec<f64>,
    probs: Vec<f64>,
}

impl Scratch {
    fn new(arch: Architecture) -> Self {
        let h = arch.hidden.unwrap_or(0);
        Self {
            hidden: vec![0.0; h],
            dhidden: vec![0.0; h],
            probs: vec![0.0; arch.num_classes],
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lowest index wins ties.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Replaces logits with softmax probabilities; returns `-ln p[y]`.
fn softmax_in_place(z: &mut [f64], y: usize) -> f64 {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let shifted_y = z[y] - max;
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    let loss = sum.ln() - shifted_y;
    z.iter_mut().for_each(|v| *v /= sum);
    loss
}

/// Uniform `(-1/sqrt(fan_in), 1/sqrt(fan_in))` initialisation for every layer.
pub fn init_model(arch: Architecture, seed: u64) -> Result<ModelParams> {
    if arch.num_features == 0 || arch.num_classes == 0 || arch.hidden == Some(0) {
        return Err(Error::InvalidArgument(
            "model dimensions must be positive".into(),
        ));
    }
    let mut rng = stream_rng(seed, Stream::ModelInit, &[]);
    let mut draw = |n: usize, fan_in: usize, out: &mut Vec<f64>| {
        let bound = 1.0 / (fan_in as f64).sqrt();
        out.extend((0..n).map(|_| rng.random_range(-bound..bound)));
    };
    let (f, c) = (arch.num_features, arch.num_classes);
    let mut flat = Vec::with_capacity(arch.param_count());
    match arch.hidden {
        None => {
            draw(f * c, f, &mut flat);
            draw(c, f, &mut flat);
        }
        Some(h) => {
            draw(f * h, f, &mut flat);
            draw(h, f, &mut flat);
            draw(h * c, h, &mut flat);
            draw(c, h, &mut flat);
        }
    }
    Ok(ModelParams { arch, flat })
}

/// Runs `cfg.epochs` of shuffled mini-batch SGD with momentum starting from
/// `start` on the shard and returns `trained - start`.
///
/// The momentum buffer starts at zero on every call.
pub fn local_train(
    start: &ModelParams,
    ds: &Dataset,
    shard: &[usize],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<UpdateVector> {
    if shard.is_empty() {
        return Err(Error::InvalidArgument("empty training shard".into()));
    }
    cfg.validate()?;
    let mut params = start.clone();
    let d = params.flat.len();
    let mut grad = vec![0.0; d];
    let mut velocity = vec![0.0; d];
    let mut scratch = Scratch::new(params.arch);
    let mut order = shard.to_vec();
    let mut rng = stream_rng(seed, Stream::LocalTrain, &[]);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                params.accumulate_sample(ds.sample(i), ds.label(i), &mut grad, &mut scratch);
            }
            let scale = 1.0 / batch.len() as f64;
            for ((w, v), g) in params.flat.iter_mut().zip(&mut velocity).zip(&grad) {
                *v = cfg.momentum * *v + g * scale;
                *w -= cfg.learning_rate * *v;
            }
        }
        if !params.is_finite() {
            return Err(Error::NonFinite);
        }
    }

    Ok(UpdateVector {
        delta: params
            .flat
            .iter()
            .zip(&start.flat)
            .map(|(a, b)| a - b)
            .collect(),
    })
}

/// Top-1 accuracy in `[0, 1]`.
pub fn evaluate(params: &ModelParams, ds: &Dataset) -> f64 {
    if ds.is_empty() {
        return 0.0;
    }
    let mut hidden = vec![0.0; params.arch.hidden.unwrap_or(0)];
    let mut logits = vec![0.0; params.arch.num_classes];
    let correct = (0..ds.len())
        .filter(|&i| {
            params.logits_into(ds.sample(i), &mut hidden, &mut logits);
            argmax(&logits) == ds.label(i)
        })
        .count();
    correct as f64 / ds.len() as f64
}
