//! Dimensionality reduction of visited states.
//!
//! States collected during training are high-dimensional; coverage is judged
//! in a 2-D projection produced by an exact (quadratic-cost) t-SNE. The
//! pipeline is: cap the buffered states at a sample budget, compute pairwise
//! affinities with per-point bandwidths calibrated to a target perplexity,
//! then minimize the KL divergence with gradient descent.

mod affinity;
mod tsne;

pub use affinity::{compute_affinities, conditional_affinities, AffinityMatrix};
pub use tsne::{tsne_embed, tsne_embed_with_init, TsneParams, TsneResult};

use crate::rng::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("perplexity {perplexity} must lie in [1, n) for n = {n}")]
    BadPerplexity { perplexity: f64, n: usize },
    #[error(
        "bandwidth search failed for point {point}: entropy {entropy:.6} \
         vs target {target:.6} after {iters} iterations"
    )]
    SigmaNonConvergence { point: usize, entropy: f64, target: f64, iters: usize },
    #[error("embedding diverged: non-finite coordinate at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("row {row} has width {got}, expected {expected}")]
    RaggedInput { row: usize, got: usize, expected: usize },
}

/// Accumulates observation vectors of a fixed width.
#[derive(Debug, Clone)]
pub struct StateBuffer {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl StateBuffer {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "state dimension must be positive");
        Self { dim, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn push(&mut self, state: &[f64]) {
        assert_eq!(state.len(), self.dim, "state width mismatch");
        self.rows.push(state.to_vec());
    }

    pub fn clear(&mut self) {
        self.rows.clear();
    }
}

/// Cap a buffer at `n_max` rows by uniform sampling without replacement;
/// smaller buffers pass through unchanged. Selected rows keep their original
/// relative order.
pub fn subsample_buffer(buffer: &StateBuffer, n_max: usize, rng: &mut Rng) -> StateBuffer {
    assert!(n_max >= 4, "subsample budget must allow an embedding");
    if buffer.len() <= n_max {
        return buffer.clone();
    }
    let mut idx: Vec<usize> = rand::seq::index::sample(rng, buffer.len(), n_max).into_vec();
    idx.sort_unstable();
    StateBuffer {
        dim: buffer.dim,
        rows: idx.into_iter().map(|i| buffer.rows[i].clone()).collect(),
    }
}

/// Validate that every row of `samples` has the same width; returns it.
pub(crate) fn check_rect(samples: &[Vec<f64>]) -> Result<usize, EmbedError> {
    let width = samples.first().map_or(0, Vec::len);
    for (row, s) in samples.iter().enumerate() {
        if s.len() != width {
            return Err(EmbedError::RaggedInput { row, got: s.len(), expected: width });
        }
    }
    Ok(width)
}
