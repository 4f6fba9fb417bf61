//! Brute-force reference implementations used by the integration tests.
//!
//! Nothing here calls into the crate under test; each function is written
//! the slow, obvious way so that agreement means something.

#![allow(dead_code)]

/// Small deterministic generator so instance streams do not depend on the
/// crate's own RNG plumbing.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn vector(&mut self, d: usize, scale: f64) -> Vec<f64> {
        (0..d).map(|_| self.range(-scale, scale)).collect()
    }
}

pub fn fedavg(updates: &[Vec<f64>]) -> Vec<f64> {
    let d = updates[0].len();
    let mut out = vec![0.0; d];
    for j in 0..d {
        let mut s = 0.0;
        for u in updates {
            s += u[j];
        }
        out[j] = s / updates.len() as f64;
    }
    out
}

pub fn median(updates: &[Vec<f64>]) -> Vec<f64> {
    let d = updates[0].len();
    let n = updates.len();
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let mut col: Vec<f64> = updates.iter().map(|u| u[j]).collect();
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.push(if n % 2 == 1 {
            col[n / 2]
        } else {
            (col[n / 2 - 1] + col[n / 2]) / 2.0
        });
    }
    out
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s
}

/// Krum scores: sum of squared distances to the `n - f - 2` nearest others.
pub fn krum_scores(updates: &[Vec<f64>], f: usize) -> Vec<f64> {
    let n = updates.len();
    let k = n - f - 2;
    (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| sq_dist(&updates[i], &updates[j]))
                .collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            d.iter().take(k).sum()
        })
        .collect()
}

/// Index of the lowest Krum score; the first index wins a tie.
pub fn krum(updates: &[Vec<f64>], f: usize) -> usize {
    let scores = krum_scores(updates, f);
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] < scores[best] {
            best = i;
        }
    }
    best
}

/// Solves `M z = v` by Gaussian elimination with partial pivoting.
pub fn solve(mut m: Vec<Vec<f64>>, mut v: Vec<f64>) -> Vec<f64> {
    let n = v.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        v.swap(col, piv);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            v[row] -= factor * v[col];
        }
    }
    let mut z = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = v[row];
        for k in row + 1..n {
            s -= m[row][k] * z[k];
        }
        z[row] = s / m[row][row];
    }
    z
}

/// Unit-penalty ridge fit `argmin ‖X θ − r‖² + ‖θ‖²` via the normal equations.
pub fn ridge(xs: &[Vec<f64>], rs: &[f64], dim: usize) -> Vec<f64> {
    let mut m = vec![vec![0.0; dim]; dim];
    let mut v = vec![0.0; dim];
    for i in 0..dim {
        m[i][i] = 1.0;
    }
    for (x, &r) in xs.iter().zip(rs) {
        for i in 0..dim {
            for j in 0..dim {
                m[i][j] += x[i] * x[j];
            }
            v[i] += r * x[i];
        }
    }
    solve(m, v)
}

/// Inverse of a small SPD matrix, column by column.
pub fn inverse(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            solve(m.to_vec(), e)
        })
        .collect();
    (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect()
}

/// `xᵀθ + α sqrt(xᵀ A⁻¹ x)` from raw `A`, `b`.
pub fn ucb(a: &[Vec<f64>], b: &[f64], x: &[f64], alpha: f64) -> f64 {
    let theta = solve(a.to_vec(), b.to_vec());
    let inv = inverse(a);
    let mut quad = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            quad += x[i] * inv[i][j] * x[j];
        }
    }
    let mean: f64 = theta.iter().zip(x).map(|(t, v)| t * v).sum();
    mean + alpha * quad.sqrt()
}

/// `(norm variance, mean pairwise cosine, norm of mean)` computed naively.
pub fn diagnostics(updates: &[Vec<f64>]) -> (f64, f64, f64) {
    let n = updates.len();
    let norm = |u: &Vec<f64>| u.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norms: Vec<f64> = updates.iter().map(norm).collect();
    let mu = norms.iter().sum::<f64>() / n as f64;
    let var = norms.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64;
    let mut cos = 0.0;
    let mut pairs = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i < j {
                pairs += 1.0;
                if norms[i] > 0.0 && norms[j] > 0.0 {
                    let dot: f64 = updates[i].iter().zip(&updates[j]).map(|(a, b)| a * b).sum();
                    cos += dot / (norms[i] * norms[j]);
                }
            }
        }
    }
    (var, cos / pairs, norm(&fedavg(updates)))
}

/// Mean cross-entropy of a softmax-regression (`hidden = None`) or one-hidden-layer
/// tanh network over the given samples. Parameter layout: `W[class][feature]`,
/// then `b`; or `W1[hidden][feature]`, `b1`, `W2[class][hidden]`, `b2`.
pub fn cross_entropy(
    params: &[f64],
    features: usize,
    classes: usize,
    hidden: Option<usize>,
    xs: &[Vec<f64>],
    ys: &[usize],
) -> f64 {
    let mut total = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let logits: Vec<f64> = match hidden {
            None => (0..classes)
                .map(|k| {
                    let mut z = params[features * classes + k];
                    for j in 0..features {
                        z += params[k * features + j] * x[j];
                    }
                    z
                })
                .collect(),
            Some(h) => {
                let b1 = features * h;
                let w2 = b1 + h;
                let b2 = w2 + h * classes;
                let act: Vec<f64> = (0..h)
                    .map(|u| {
                        let mut z = params[b1 + u];
                        for j in 0..features {
                            z += params[u * features + j] * x[j];
                        }
                        z.tanh()
                    })
                    .collect();
                (0..classes)
                    .map(|k| {
                        let mut z = params[b2 + k];
                        for u in 0..h {
                            z += params[w2 + k * h + u] * act[u];
                        }
                        z
                    })
                    .collect()
            }
        };
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        total += lse - logits[y];
    }
    total / xs.len() as f64
}
