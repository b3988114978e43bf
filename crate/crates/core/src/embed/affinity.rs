//! High-dimensional affinities with perplexity-calibrated bandwidths.
//!
//! Each sample i gets a Gaussian bandwidth σ_i such that the Shannon entropy
//! of its conditional neighbor distribution equals log₂(perplexity). The
//! search runs over the precision β_i = 1/(2σ_i²): entropy is monotonically
//! decreasing in β, so an exponential bracket plus bisection converges to
//! machine precision well inside the iteration budget. The conditionals are
//! then symmetrized into joint probabilities p_ij = (p_{j|i} + p_{i|j})/(2n).

use super::EmbedError;

/// Symmetric joint affinities over n samples, stored dense row-major with a
/// zero diagonal.
#[derive(Debug, Clone)]
pub struct AffinityMatrix {
    n: usize,
    p: Vec<f64>,
}

impl AffinityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    /// Total probability mass; 1 within 1e-9 by construction.
    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Squared Euclidean distances with the degeneracy guard: 1e-12 is added to
/// every off-diagonal entry so exact duplicates still yield usable kernels.
fn squared_distances(samples: &[Vec<f64>]) -> Vec<f64> {
    let n = samples.len();
    let mut d2 = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = samples[i]
                .iter()
                .zip(&samples[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                + 1e-12;
            d2[i * n + j] = d;
            d2[j * n + i] = d;
        }
    }
    d2
}

/// Entropy (bits) and conditional row for one point at a given precision.
/// Distances are shifted by the row minimum before exponentiation so large β
/// cannot underflow every term.
fn row_at_beta(dist_row: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let min_d = dist_row
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (j, &d) in dist_row.iter().enumerate() {
        let w = if j == i { 0.0 } else { (-beta * (d - min_d)).exp() };
        out[j] = w;
        sum += w;
    }
    // H = ln Σw + β·E[d − min_d], converted from nats to bits.
    let mut weighted = 0.0;
    for (j, &d) in dist_row.iter().enumerate() {
        if j != i {
            weighted += out[j] * (d - min_d);
        }
    }
    let h_nats = sum.ln() + beta * weighted / sum;
    for w in out.iter_mut() {
        *w /= sum;
    }
    h_nats / std::f64::consts::LN_2
}

/// Conditional affinities p_{j|i} (row-major) and the fitted precisions β_i.
///
/// Requires n ≥ 3 and 1 ≤ perplexity < n. (Three points suffice for a
/// well-posed conditional distribution; the joint pipeline still demands the
/// larger minimum it states.)
pub fn conditional_affinities(
    samples: &[Vec<f64>],
    perplexity: f64,
) -> Result<(Vec<f64>, Vec<f64>), EmbedError> {
    const MAX_ITERS: usize = 200;
    let n = samples.len();
    if n < 3 {
        return Err(EmbedError::TooFewSamples { got: n, min: 3 });
    }
    if !(1.0..n as f64).contains(&perplexity) {
        return Err(EmbedError::BadPerplexity { perplexity, n });
    }
    super::check_rect(samples)?;

    let target = perplexity.log2();
    let d2 = squared_distances(samples);
    let mut p = vec![0.0; n * n];
    let mut betas = vec![0.0; n];

    for i in 0..n {
        let dist_row = &d2[i * n..(i + 1) * n];
        let row = &mut p[i * n..(i + 1) * n];
        let mut beta = 1.0;
        let mut lo: Option<f64> = None;
        let mut hi: Option<f64> = None;
        let mut entropy = row_at_beta(dist_row, i, beta, row);
        let mut iters = 0;
        // Entropy decreases in beta: too much entropy → raise beta.
        while (entropy - target).abs() > 1e-11 && iters < MAX_ITERS {
            if entropy > target {
                lo = Some(beta);
                beta = match hi {
                    Some(h) => (beta + h) / 2.0,
                    None => beta * 2.0,
                };
            } else {
                hi = Some(beta);
                beta = match lo {
                    Some(l) => (beta + l) / 2.0,
                    None => beta / 2.0,
                };
            }
            entropy = row_at_beta(dist_row, i, beta, row);
            iters += 1;
            // The bracket can collapse to adjacent floats while the entropy
            // plateaus (e.g. equidistant neighbors); stop once no further
            // refinement is possible.
            if let (Some(l), Some(h)) = (lo, hi) {
                if (h - l) <= f64::EPSILON * beta.abs() {
                    break;
                }
            }
        }
        if (entropy - target).abs() > 1e-5 {
            return Err(EmbedError::SigmaNonConvergence {
                point: i,
                entropy,
                target,
                iters,
            });
        }
        betas[i] = beta;
    }
    Ok((p, betas))
}

/// Joint affinities for the t-SNE objective. Requires n ≥ 4.
pub fn compute_affinities(
    samples: &[Vec<f64>],
    perplexity: f64,
) -> Result<AffinityMatrix, EmbedError> {
    let n = samples.len();
    if n < 4 {
        return Err(EmbedError::TooFewSamples { got: n, min: 4 });
    }
    let (cond, _) = conditional_affinities(samples, perplexity)?;
    let mut p = vec![0.0; n * n];
    let denom = 2.0 * n as f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (cond[i * n + j] + cond[j * n + i]) / denom;
            p[i * n + j] = v;
            p[j * n + i] = v;
        }
    }
    Ok(AffinityMatrix { n, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use proptest::prelude::*;
    use rand::Rng as _;

    fn entropy_bits(row: &[f64]) -> f64 {
        row.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }

    #[test]
    fn equilateral_triangle_gives_uniform_conditionals() {
        // Three mutually equidistant points at perplexity 2: symmetry forces
        // p_{j|i} = 1/2 for both neighbors of every point.
        let samples = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 3f64.sqrt() / 2.0],
        ];
        let (cond, _) = conditional_affinities(&samples, 2.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { 0.5 };
                assert!(
                    (cond[i * 3 + j] - expect).abs() < 1e-9,
                    "p[{j}|{i}] = {}",
                    cond[i * 3 + j]
                );
            }
        }
    }

    #[test]
    fn joint_matrix_normalizes_to_one() {
        let mut rng = stream_rng(1, Stream::Tsne(0));
        for trial in 0..20 {
            let n = 5 + trial;
            let samples: Vec<Vec<f64>> =
                (0..n).map(|_| (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
            let aff = compute_affinities(&samples, 4.0).unwrap();
            assert!((aff.sum() - 1.0).abs() <= 1e-9, "sum {}", aff.sum());
        }
    }

    #[test]
    fn four_point_joint_matches_definition_oracle() {
        // Oracle: for each point, bisect on sigma directly (not the
        // precision), evaluating entropy straight from the textbook
        // definition, then symmetrize. Written without sharing any helper
        // with the production path.
        let samples = vec![
            vec![0.0, 0.0],
            vec![1.3, 0.2],
            vec![-0.4, 2.1],
            vec![0.9, -1.1],
        ];
        let perplexity = 2.5f64;
        let n = samples.len();
        let target_bits = perplexity.log2();

        let cond_row = |i: usize, sigma: f64| -> Vec<f64> {
            let mut row = vec![0.0; n];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d2: f64 = samples[i]
                    .iter()
                    .zip(&samples[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    + 1e-12;
                row[j] = (-d2 / (2.0 * sigma * sigma)).exp();
            }
            let s: f64 = row.iter().sum();
            row.iter().map(|v| v / s).collect()
        };
        let mut oracle_cond = vec![0.0; n * n];
        for i in 0..n {
            let (mut lo, mut hi) = (1e-6, 1e6);
            for _ in 0..500 {
                let mid = (lo + hi) / 2.0;
                let h = entropy_bits(&cond_row(i, mid));
                // Entropy grows with sigma.
                if h < target_bits {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let row = cond_row(i, (lo + hi) / 2.0);
            oracle_cond[i * n..(i + 1) * n].copy_from_slice(&row);
        }
        let mut oracle = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    oracle[i * n + j] =
                        (oracle_cond[i * n + j] + oracle_cond[j * n + i]) / (2.0 * n as f64);
                }
            }
        }

        let aff = compute_affinities(&samples, perplexity).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!(
                    (aff.get(i, j) - oracle[i * n + j]).abs() <= 1e-8,
                    "p[{i},{j}]: {} vs {}",
                    aff.get(i, j),
                    oracle[i * n + j]
                );
            }
        }
    }

    #[test]
    fn conditional_entropies_hit_the_perplexity_target() {
        let mut rng = stream_rng(2, Stream::Tsne(1));
        let n = 40;
        let samples: Vec<Vec<f64>> =
            (0..n).map(|_| (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let perplexity = 10.0;
        let (cond, _) = conditional_affinities(&samples, perplexity).unwrap();
        for i in 0..n {
            let h = entropy_bits(&cond[i * n..(i + 1) * n]);
            assert!(
                (h - perplexity.log2()).abs() <= 1e-5,
                "row {i} entropy {h} vs {}",
                perplexity.log2()
            );
        }
    }

    #[test]
    fn argument_validation() {
        let two = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            conditional_affinities(&two, 1.5),
            Err(EmbedError::TooFewSamples { got: 2, min: 3 })
        ));
        let four: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        assert!(matches!(
            compute_affinities(&four, 4.0),
            Err(EmbedError::BadPerplexity { .. })
        ));
        let three: Vec<Vec<f64>> = (0..3).map(|i| vec![i as f64]).collect();
        assert!(matches!(
            compute_affinities(&three, 2.0),
            Err(EmbedError::TooFewSamples { got: 3, min: 4 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        /// Symmetry, zero diagonal, non-negativity, and unit mass hold
        /// whenever the bandwidth search converges (clustered duplicates can
        /// legitimately fail it, which is an error, not a bad matrix).
        #[test]
        fn affinity_invariants(
            seed in 0u64..1000,
            n in 5usize..24,
            d in 1usize..5,
        ) {
            let mut rng = crate::rng::seeded_rng(seed);
            let samples: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect())
                .collect();
            if let Ok(aff) = compute_affinities(&samples, 3.0) {
                prop_assert!((aff.sum() - 1.0).abs() <= 1e-9);
                for i in 0..n {
                    prop_assert_eq!(aff.get(i, i), 0.0);
                    for j in 0..n {
                        prop_assert!(aff.get(i, j) >= 0.0);
                        prop_assert_eq!(aff.get(i, j), aff.get(j, i));
                    }
                }
            }
        }
    }
}
