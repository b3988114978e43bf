//! Approximate pseudo-coverage over embedded state batches.
//!
//! Each batch of episodes contributes a fresh 2-D embedding of its visited
//! states. Embeddings from different batches share no coordinate frame, so
//! every batch is normalized into the unit square, voted onto a persistent
//! G×G grid there, and the occupied-cell set grows by union. APC is the
//! fraction of grid cells ever occupied — cheap to compute, monotone in the
//! number of batches, and comparable across runs with the same G.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::embed::{subsample_buffer, tsne_embed, EmbedError, StateBuffer, TsneParams};
use crate::rng::Rng;

#[derive(Debug, Error)]
pub enum CoverageError {
    #[error("cannot compute limits of an empty embedding")]
    EmptyEmbedding,
    #[error("point {index} axis {axis} = {value} lies outside limits [{lo}, {hi}]")]
    PointOutsideLimits { index: usize, axis: usize, value: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// Per-axis bounding interval of one batch's embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Limits {
    fn axis(&self, axis: usize) -> [f64; 2] {
        if axis == 0 {
            self.x
        } else {
            self.y
        }
    }
}

/// Axis-aligned bounds of `points`, padded by 1% of each axis's range so
/// every point ends up strictly inside. A degenerate axis (all points equal)
/// widens to 1e-6 around the shared value.
pub fn calculate_limits(points: &[[f64; 2]]) -> Result<Limits, CoverageError> {
    if points.is_empty() {
        return Err(CoverageError::EmptyEmbedding);
    }
    let mut lims = [[f64::INFINITY, f64::NEG_INFINITY]; 2];
    for p in points {
        for axis in 0..2 {
            lims[axis][0] = lims[axis][0].min(p[axis]);
            lims[axis][1] = lims[axis][1].max(p[axis]);
        }
    }
    for lim in &mut lims {
        let range = lim[1] - lim[0];
        if range == 0.0 {
            lim[0] -= 5e-7;
            lim[1] += 5e-7;
        } else {
            lim[0] -= 0.01 * range;
            lim[1] += 0.01 * range;
        }
    }
    Ok(Limits { x: lims[0], y: lims[1] })
}

/// A uniform G×G partition of a limit rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub g: usize,
    pub limits: Limits,
}

pub fn create_grid(limits: Limits, g: usize) -> GridSpec {
    assert!(g >= 2, "grid needs at least 2 cells per axis");
    assert!(limits.x[1] > limits.x[0] && limits.y[1] > limits.y[0], "limits must have width");
    GridSpec { g, limits }
}

impl GridSpec {
    /// Cell extent per axis: (max − min) / G.
    pub fn cell_size(&self) -> [f64; 2] {
        [
            (self.limits.x[1] - self.limits.x[0]) / self.g as f64,
            (self.limits.y[1] - self.limits.y[0]) / self.g as f64,
        ]
    }

    pub fn total_cells(&self) -> usize {
        self.g * self.g
    }
}

/// Map `points` through the per-axis affine transform that sends `limits`
/// onto the unit square. Errors if any point falls outside the limits.
pub fn normalize_embedding(
    points: &[[f64; 2]],
    limits: &Limits,
) -> Result<Vec<[f64; 2]>, CoverageError> {
    let mut out = Vec::with_capacity(points.len());
    for (index, p) in points.iter().enumerate() {
        let mut q = [0.0f64; 2];
        for axis in 0..2 {
            let [lo, hi] = limits.axis(axis);
            if p[axis] < lo || p[axis] > hi {
                return Err(CoverageError::PointOutsideLimits {
                    index,
                    axis,
                    value: p[axis],
                    lo,
                    hi,
                });
            }
            q[axis] = (p[axis] - lo) / (hi - lo);
        }
        out.push(q);
    }
    Ok(out)
}

/// Assign each unit-square point to a grid cell and count votes per cell.
///
/// Cells are half-open with a closed top edge: index = ⌊coord·G⌋, clamped to
/// G−1 so coordinate 1.0 still lands in the last cell. Returns only cells
/// that received at least one vote, in index order.
pub fn histogram_vote(points: &[[f64; 2]], g: usize) -> Vec<((usize, usize), usize)> {
    let mut counts = std::collections::BTreeMap::new();
    for p in points {
        debug_assert!(
            (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]),
            "vote expects unit-square points, got {p:?}"
        );
        let i = ((p[0] * g as f64).floor() as usize).min(g - 1);
        let j = ((p[1] * g as f64).floor() as usize).min(g - 1);
        *counts.entry((i, j)).or_insert(0usize) += 1;
    }
    counts.into_iter().collect()
}

/// Set of grid cells occupied so far, persisted across batches.
#[derive(Debug, Clone)]
pub struct OccupancySet {
    g: usize,
    cells: BTreeSet<(usize, usize)>,
}

impl OccupancySet {
    pub fn new(g: usize) -> Self {
        assert!(g >= 2);
        Self { g, cells: BTreeSet::new() }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: (usize, usize)) -> bool {
        self.cells.contains(&cell)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells.iter().copied()
    }

    /// Union in newly voted cells; returns how many were not yet occupied.
    pub fn accumulate<I: IntoIterator<Item = (usize, usize)>>(&mut self, new_cells: I) -> usize {
        let mut added = 0;
        for cell in new_cells {
            assert!(cell.0 < self.g && cell.1 < self.g, "cell {cell:?} out of range");
            if self.cells.insert(cell) {
                added += 1;
            }
        }
        added
    }

    /// Occupied fraction: |cells| / G².
    pub fn apc(&self) -> f64 {
        self.cells.len() as f64 / (self.g * self.g) as f64
    }
}

/// One batch's outcome in the coverage ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub batch: usize,
    pub episode_start: usize,
    pub episode_end: usize,
    pub new_cells: usize,
    pub cum_occupied: usize,
    pub apc: f64,
}

pub const COVERAGE_CSV_HEADER: &str = "batch,episode_start,episode_end,new_cells,cum_occupied,apc";

impl CoverageRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.batch, self.episode_start, self.episode_end, self.new_cells, self.cum_occupied,
            self.apc
        )
    }
}

/// Batch-by-batch coverage history of one run.
#[derive(Debug, Clone, Default)]
pub struct CoverageLedger {
    rows: Vec<CoverageRow>,
}

impl CoverageLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: CoverageRow) {
        if let Some(last) = self.rows.last() {
            debug_assert!(row.apc >= last.apc, "APC must not decrease");
        }
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[CoverageRow] {
        &self.rows
    }

    pub fn final_apc(&self) -> Option<f64> {
        self.rows.last().map(|r| r.apc)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(COVERAGE_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.csv_line());
        }
        out
    }
}

/// Knobs for the per-batch assessment pipeline.
#[derive(Debug, Clone)]
pub struct CoverageConfig {
    pub grid_cells: usize,
    pub subsample_max: usize,
    pub tsne: TsneParams,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self { grid_cells: 50, subsample_max: 2000, tsne: TsneParams::default() }
    }
}

/// Everything produced by one batch assessment, for logging and snapshots.
#[derive(Debug, Clone)]
pub struct BatchAssessment {
    pub row: CoverageRow,
    /// The 2-D embedding of the subsample, in t-SNE coordinates.
    pub embedding: Vec<[f64; 2]>,
    /// The subsampled states that were embedded, row-aligned with `embedding`.
    pub samples: Vec<Vec<f64>>,
}

/// Run the full per-batch pipeline: subsample the buffered states, embed
/// them, normalize into the unit square, vote onto the grid, and fold the
/// result into `occ`. The buffer is cleared afterwards so the next batch
/// starts fresh.
pub fn assess_batch(
    buffer: &mut StateBuffer,
    occ: &mut OccupancySet,
    config: &CoverageConfig,
    batch: usize,
    episode_range: (usize, usize),
    rng: &mut Rng,
) -> Result<BatchAssessment, CoverageError> {
    let sampled = subsample_buffer(buffer, config.subsample_max, rng);
    let samples = sampled.rows().to_vec();
    let embedding = tsne_embed(&samples, &config.tsne, rng)?.points;
    let limits = calculate_limits(&embedding)?;
    let unit = normalize_embedding(&embedding, &limits)?;
    let votes = histogram_vote(&unit, occ.g());
    let new_cells = occ.accumulate(votes.into_iter().map(|(cell, _)| cell));
    buffer.clear();
    Ok(BatchAssessment {
        row: CoverageRow {
            batch,
            episode_start: episode_range.0,
            episode_end: episode_range.1,
            new_cells,
            cum_occupied: occ.len(),
            apc: occ.apc(),
        },
        embedding,
        samples,
    })
}
