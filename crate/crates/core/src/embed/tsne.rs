//! Exact t-SNE by gradient descent on KL(P‖Q).
//!
//! Quadratic-cost implementation: dense affinities, dense Student-t kernel,
//! fully sequential arithmetic so a given seed reproduces the embedding to
//! the bit. Early iterations exaggerate P to let clusters form before the
//! momentum steps settle them.

use super::affinity::compute_affinities;
use super::EmbedError;
use crate::rng::Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, PartialEq)]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    /// P multiplier during the early phase.
    pub early_exaggeration: f64,
    /// Fraction of iterations spent exaggerated.
    pub exaggeration_fraction: f64,
    pub momentum_start: f64,
    pub momentum_final: f64,
    /// Iteration at which momentum switches from start to final.
    pub momentum_switch: usize,
    /// Std of the Gaussian initialization.
    pub init_std: f64,
}

impl Default for TsneParams {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 500,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_fraction: 0.1,
            momentum_start: 0.5,
            momentum_final: 0.8,
            momentum_switch: 250,
            init_std: 1e-4,
        }
    }
}

/// Final coordinates plus the recorded optimization trace.
#[derive(Debug, Clone)]
pub struct TsneResult {
    pub points: Vec<[f64; 2]>,
    /// `(iteration, KL)` samples taken every 10 iterations, at the end of
    /// the exaggeration phase, and at the last iteration — always against
    /// the true (unexaggerated) P.
    pub kl_trace: Vec<(usize, f64)>,
    pub exaggeration_end_kl: f64,
    pub final_kl: f64,
}

/// KL(P‖Q) at embedding `y`, with Q's Student-t masses floored at 1e-12.
fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    let mut z = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i * n + j] = v;
            num[j * n + i] = v;
            z += 2.0 * v;
        }
    }
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[i * n + j];
            if pij > 0.0 {
                let q = (num[i * n + j] / z).max(1e-12);
                kl += pij * (pij / q).ln();
            }
        }
    }
    kl
}

/// Embed with an explicit initial configuration (one 2-D point per sample).
///
/// Exposed so callers can pin the initialization; notably, permuting the
/// samples together with their initial points permutes the output the same
/// way.
pub fn tsne_embed_with_init(
    samples: &[Vec<f64>],
    params: &TsneParams,
    init: &[[f64; 2]],
) -> Result<TsneResult, EmbedError> {
    let n = samples.len();
    assert_eq!(init.len(), n, "one initial point per sample");
    let aff = compute_affinities(samples, params.perplexity)?;
    let p = aff.values();

    let exag_end = ((params.iterations as f64 * params.exaggeration_fraction).ceil() as usize)
        .min(params.iterations);
    let mut y = init.to_vec();
    let mut vel = vec![[0.0f64; 2]; n];
    let mut grad = vec![[0.0f64; 2]; n];
    let mut num = vec![0.0; n * n];

    let mut kl_trace = Vec::new();
    let mut exaggeration_end_kl = f64::NAN;

    for it in 0..params.iterations {
        // Student-t kernel and its normalizer.
        let mut z = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                let v = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = v;
                num[j * n + i] = v;
                z += 2.0 * v;
            }
        }

        let exag = if it < exag_end { params.early_exaggeration } else { 1.0 };
        for i in 0..n {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let nij = num[i * n + j];
                let coeff = (exag * p[i * n + j] - nij / z) * nij;
                gx += coeff * (y[i][0] - y[j][0]);
                gy += coeff * (y[i][1] - y[j][1]);
            }
            grad[i] = [4.0 * gx, 4.0 * gy];
        }

        let momentum =
            if it < params.momentum_switch { params.momentum_start } else { params.momentum_final };
        for i in 0..n {
            for c in 0..2 {
                vel[i][c] = momentum * vel[i][c] - params.learning_rate * grad[i][c];
                y[i][c] += vel[i][c];
            }
        }

        // Recenter, and fail fast on divergence.
        let mut mean = [0.0f64; 2];
        for point in &y {
            mean[0] += point[0];
            mean[1] += point[1];
        }
        mean[0] /= n as f64;
        mean[1] /= n as f64;
        let mut finite = mean[0].is_finite() && mean[1].is_finite();
        for point in y.iter_mut() {
            point[0] -= mean[0];
            point[1] -= mean[1];
            finite &= point[0].is_finite() && point[1].is_finite();
        }
        if !finite {
            return Err(EmbedError::NonFinite { iteration: it + 1 });
        }

        let done = it + 1;
        if done == exag_end {
            exaggeration_end_kl = kl_divergence(p, &y);
            kl_trace.push((done, exaggeration_end_kl));
        } else if done % 10 == 0 || done == params.iterations {
            kl_trace.push((done, kl_divergence(p, &y)));
        }
    }

    let final_kl = kl_trace.last().map(|&(_, kl)| kl).unwrap_or(f64::NAN);
    Ok(TsneResult { points: y, kl_trace, exaggeration_end_kl, final_kl })
}

/// Embed with the standard small-Gaussian initialization drawn from `rng`.
pub fn tsne_embed(
    samples: &[Vec<f64>],
    params: &TsneParams,
    rng: &mut Rng,
) -> Result<TsneResult, EmbedError> {
    let normal = Normal::new(0.0, params.init_std).expect("init_std is finite");
    let init: Vec<[f64; 2]> =
        (0..samples.len()).map(|_| [normal.sample(rng), normal.sample(rng)]).collect();
    tsne_embed_with_init(samples, params, &init)
}
