//! Baseline-vs-maximized comparison across seeds, with artifact emission.
//!
//! For every seed both arms run to completion (sequentially — results are
//! independent of any scheduling), per-run CSVs land under
//! `<out>/<arm>/seed<n>/`, and the aggregate layer reduces the surviving
//! runs into mean ± std series, comparison charts, and a summary table with
//! the observed percentage deltas.

use std::path::{Path, PathBuf};

use crate::harness::chart::{Band, LineChart, ScatterChart, Series};
use crate::harness::config::ExperimentConfig;
use crate::harness::csvio::{
    coverage_to_csv, rewards_to_csv, snapshot_to_csv, trace_to_csv, write_file,
};
use crate::harness::runner::{run_training, RunResult, Snapshot};

use super::HarnessError;

pub const BASELINE_COLOR: &str = "#1f77b4";
pub const MAXIMIZED_COLOR: &str = "#d62728";

/// Mean/std reductions for one arm across its successful seeds.
#[derive(Debug, Clone)]
pub struct ArmStats {
    pub seeds: Vec<u64>,
    /// Per-episode mean and (population) std of cumulative reward.
    pub reward_mean: Vec<f64>,
    pub reward_std: Vec<f64>,
    /// Per-batch mean and std of cumulative APC.
    pub apc_mean: Vec<f64>,
    pub apc_std: Vec<f64>,
    pub final_apc_mean: f64,
    pub final_apc_std: f64,
    /// Reward averaged over the last 100 episodes (or all, if fewer).
    pub last100_mean: f64,
    pub last100_std: f64,
}

#[derive(Debug, Clone)]
pub struct AggregateStats {
    pub baseline: ArmStats,
    pub maximized: ArmStats,
    /// (maximized − baseline) / baseline × 100, on mean final APC.
    pub apc_delta_pct: f64,
    /// Same delta on mean last-100-episode reward.
    pub reward_delta_pct: f64,
}

/// A failed run, kept for the failure report.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub seed: u64,
    pub maximized: bool,
    pub message: String,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub stats: AggregateStats,
    pub runs: Vec<RunResult>,
    pub failures: Vec<RunFailure>,
    pub artifacts: Vec<PathBuf>,
}

pub fn arm_name(maximized: bool) -> &'static str {
    if maximized {
        "maximized"
    } else {
        "baseline"
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn std_dev(values: &[f64], mean: f64) -> f64 {
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Column-wise mean/std across equally long series.
fn reduce_columns(series: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let len = series.first().map_or(0, |s| s.len());
    let mut means = Vec::with_capacity(len);
    let mut stds = Vec::with_capacity(len);
    for i in 0..len {
        let col: Vec<f64> = series.iter().map(|s| s[i]).collect();
        let m = mean(&col);
        means.push(m);
        stds.push(std_dev(&col, m));
    }
    (means, stds)
}

/// Mean reward over the final 100 episodes of one run.
pub fn last100_reward(rewards: &[f64]) -> f64 {
    let tail = rewards.len().saturating_sub(100);
    mean(&rewards[tail..])
}

fn reduce_arm(runs: &[&RunResult]) -> ArmStats {
    let rewards: Vec<&[f64]> = runs.iter().map(|r| r.rewards.as_slice()).collect();
    let (reward_mean, reward_std) = reduce_columns(&rewards);

    let apcs: Vec<Vec<f64>> =
        runs.iter().map(|r| r.ledger.rows().iter().map(|row| row.apc).collect()).collect();
    let apc_refs: Vec<&[f64]> = apcs.iter().map(Vec::as_slice).collect();
    let (apc_mean, apc_std) = reduce_columns(&apc_refs);

    let finals: Vec<f64> = runs.iter().map(|r| r.final_apc).collect();
    let final_apc_mean = mean(&finals);
    let final_apc_std = std_dev(&finals, final_apc_mean);

    let tails: Vec<f64> = runs.iter().map(|r| last100_reward(&r.rewards)).collect();
    let last100_mean = mean(&tails);
    let last100_std = std_dev(&tails, last100_mean);

    ArmStats {
        seeds: runs.iter().map(|r| r.seed).collect(),
        reward_mean,
        reward_std,
        apc_mean,
        apc_std,
        final_apc_mean,
        final_apc_std,
        last100_mean,
        last100_std,
    }
}

fn pct_delta(base: f64, maxi: f64) -> f64 {
    (maxi - base) / base * 100.0
}

/// Aggregate already-completed runs (both arms) into comparison statistics.
pub fn aggregate_runs(runs: &[RunResult]) -> Result<AggregateStats, HarnessError> {
    let baseline: Vec<&RunResult> = runs.iter().filter(|r| !r.maximized).collect();
    let maximized: Vec<&RunResult> = runs.iter().filter(|r| r.maximized).collect();
    if baseline.is_empty() || maximized.is_empty() {
        return Err(HarnessError::Aggregate {
            message: format!(
                "need at least one successful run per arm (baseline {}, maximized {})",
                baseline.len(),
                maximized.len()
            ),
        });
    }
    let base = reduce_arm(&baseline);
    let maxi = reduce_arm(&maximized);
    let apc_delta_pct = pct_delta(base.final_apc_mean, maxi.final_apc_mean);
    let reward_delta_pct = pct_delta(base.last100_mean, maxi.last100_mean);
    Ok(AggregateStats { baseline: base, maximized: maxi, apc_delta_pct, reward_delta_pct })
}

/// Episode count at which each coverage batch closed — the x-axis shared by
/// APC curves.
fn batch_x(config: &ExperimentConfig, n_batches: usize) -> Vec<f64> {
    (0..n_batches).map(|b| ((b + 1) * config.batch_episodes) as f64).collect()
}

/// Write one run's CSV artifacts; returns the paths written.
pub fn write_run_artifacts(
    out_dir: &Path,
    result: &RunResult,
) -> Result<Vec<PathBuf>, HarnessError> {
    let dir = out_dir.join(arm_name(result.maximized)).join(format!("seed{}", result.seed));
    let mut written = Vec::new();

    let rewards_path = dir.join("rewards.csv");
    write_file(&rewards_path, &rewards_to_csv(&result.rewards, &result.steps))?;
    written.push(rewards_path);

    let coverage_path = dir.join("coverage.csv");
    write_file(&coverage_path, &coverage_to_csv(&result.ledger))?;
    written.push(coverage_path);

    if !result.trace.is_empty() {
        let abs_dim = result.trace[0].abstraction.len();
        let trace_path = dir.join("trace.csv");
        write_file(&trace_path, &trace_to_csv(&result.trace, abs_dim))?;
        written.push(trace_path);
    }

    for snapshot in &result.snapshots {
        written.extend(emit_embedding_snapshot(&dir, snapshot)?);
    }
    Ok(written)
}

/// Scatter chart of one embedding snapshot, colored by first-action q.
pub fn snapshot_chart(rows: &[[f64; 3]], episode: usize) -> ScatterChart {
    ScatterChart {
        title: format!("embedded states at episode {episode}"),
        x_label: "embedding x".into(),
        y_label: "embedding y".into(),
        value_label: "q(s, first action)".into(),
        points: rows.iter().map(|&[x, y, q]| (x, y, q)).collect(),
    }
}

/// Write a snapshot's CSV and scatter chart into `dir`.
pub fn emit_embedding_snapshot(
    dir: &Path,
    snapshot: &Snapshot,
) -> Result<Vec<PathBuf>, HarnessError> {
    let csv_path = dir.join(format!("snapshot_{:04}.csv", snapshot.episode));
    write_file(&csv_path, &snapshot_to_csv(&snapshot.rows))?;
    let svg_path = dir.join(format!("snapshot_{:04}.svg", snapshot.episode));
    write_file(&svg_path, &snapshot_chart(&snapshot.rows, snapshot.episode).render())?;
    Ok(vec![csv_path, svg_path])
}

fn comparison_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    x: &[f64],
    stats: &AggregateStats,
    pick: impl Fn(&ArmStats) -> (&[f64], &[f64]),
) -> LineChart {
    let mut chart = LineChart {
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        series: Vec::new(),
        bands: Vec::new(),
    };
    for (arm, label, color) in [
        (&stats.baseline, "baseline", BASELINE_COLOR),
        (&stats.maximized, "maximized", MAXIMIZED_COLOR),
    ] {
        let (m, s) = pick(arm);
        let pts = |vals: &[f64]| -> Vec<(f64, f64)> {
            x.iter().copied().zip(vals.iter().copied()).collect()
        };
        if arm.seeds.len() >= 2 {
            let lo: Vec<f64> = m.iter().zip(s).map(|(a, b)| a - b).collect();
            let hi: Vec<f64> = m.iter().zip(s).map(|(a, b)| a + b).collect();
            chart.bands.push(Band { color: color.into(), lo: pts(&lo), hi: pts(&hi) });
        }
        chart.series.push(Series {
            label: format!("{label} (n={})", arm.seeds.len()),
            color: color.into(),
            points: pts(m),
        });
    }
    chart
}

fn aggregate_csv(x_name: &str, x: &[f64], stats: &AggregateStats, pick: impl Fn(&ArmStats) -> (&[f64], &[f64])) -> String {
    let (bm, bs) = pick(&stats.baseline);
    let (mm, ms) = pick(&stats.maximized);
    let mut out = format!(
        "# drlcov aggregate v1\n{x_name},baseline_mean,baseline_std,maximized_mean,maximized_std\n"
    );
    for i in 0..x.len() {
        out.push_str(&format!("{},{},{},{},{}\n", x[i], bm[i], bs[i], mm[i], ms[i]));
    }
    out
}

fn summary_csv(stats: &AggregateStats) -> String {
    format!(
        "# drlcov summary v1\n\
         metric,baseline_mean,baseline_std,maximized_mean,maximized_std,delta_pct\n\
         final_apc,{},{},{},{},{}\n\
         last100_reward,{},{},{},{},{}\n",
        stats.baseline.final_apc_mean,
        stats.baseline.final_apc_std,
        stats.maximized.final_apc_mean,
        stats.maximized.final_apc_std,
        stats.apc_delta_pct,
        stats.baseline.last100_mean,
        stats.baseline.last100_std,
        stats.maximized.last100_mean,
        stats.maximized.last100_std,
        stats.reward_delta_pct,
    )
}

fn failures_csv(failures: &[RunFailure]) -> String {
    let mut out = String::from("# drlcov failures v1\nseed,arm,message\n");
    for f in failures {
        let msg = f.message.replace(['\n', ','], ";");
        out.push_str(&format!("{},{},{}\n", f.seed, arm_name(f.maximized), msg));
    }
    out
}

/// Run both arms for every seed, write all artifacts, and aggregate.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    let out_dir = config.out_dir.as_path();
    let mut artifacts = Vec::new();

    let config_path = out_dir.join("config.toml");
    write_file(&config_path, &config.to_toml())?;
    artifacts.push(config_path);

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for &seed in &config.seeds {
        for maximize in [false, true] {
            match run_training(config, seed, maximize) {
                Ok(result) => {
                    artifacts.extend(write_run_artifacts(out_dir, &result)?);
                    runs.push(result);
                }
                Err(err) => failures.push(RunFailure {
                    seed,
                    maximized: maximize,
                    message: err.to_string(),
                }),
            }
        }
    }
    if !failures.is_empty() {
        let path = out_dir.join("failures.csv");
        write_file(&path, &failures_csv(&failures))?;
        artifacts.push(path);
    }

    let stats = aggregate_runs(&runs)?;

    let n_batches = stats.baseline.apc_mean.len();
    let bx = batch_x(config, n_batches);
    let ex: Vec<f64> = (0..stats.baseline.reward_mean.len()).map(|e| e as f64).collect();

    let rewards_path = out_dir.join("aggregate_rewards.csv");
    write_file(
        &rewards_path,
        &aggregate_csv("episode", &ex, &stats, |a| (&a.reward_mean, &a.reward_std)),
    )?;
    artifacts.push(rewards_path);

    let apc_path = out_dir.join("aggregate_apc.csv");
    write_file(&apc_path, &aggregate_csv("episodes", &bx, &stats, |a| (&a.apc_mean, &a.apc_std)))?;
    artifacts.push(apc_path);

    let summary_path = out_dir.join("summary.csv");
    write_file(&summary_path, &summary_csv(&stats))?;
    artifacts.push(summary_path);

    let reward_chart = comparison_chart(
        &format!("{}: reward per episode", config.environment),
        "episode",
        "cumulative reward",
        &ex,
        &stats,
        |a| (&a.reward_mean, &a.reward_std),
    );
    let reward_svg = out_dir.join("reward.svg");
    write_file(&reward_svg, &reward_chart.render())?;
    artifacts.push(reward_svg);

    let apc_chart = comparison_chart(
        &format!("{}: approximate pseudo-coverage", config.environment),
        "episodes",
        "APC",
        &bx,
        &stats,
        |a| (&a.apc_mean, &a.apc_std),
    );
    let apc_svg = out_dir.join("apc.svg");
    write_file(&apc_svg, &apc_chart.render())?;
    artifacts.push(apc_svg);

    Ok(ExperimentOutcome { stats, runs, failures, artifacts })
}
