//! `drlcov` — train, compare, and audit coverage-assessed DQN runs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use drlcov::coverage::{calculate_limits, histogram_vote, normalize_embedding, OccupancySet};
use drlcov::harness::config::{EnvId, ExperimentConfig};
use drlcov::harness::csvio::{parse_coverage_csv, parse_snapshot_csv, read_file, write_file};
use drlcov::harness::experiment::{
    arm_name, last100_reward, run_experiment, snapshot_chart, write_run_artifacts,
};
use drlcov::harness::runner::run_training;

#[derive(Parser)]
#[command(
    name = "drlcov",
    version,
    about = "Coverage assessment and acceleration for small DQN agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single training arm and write its artifacts.
    Train(TrainArgs),
    /// Run baseline and maximized arms across all configured seeds.
    Experiment(ConfigArgs),
    /// Recompute APC from stored snapshot embeddings and cross-check
    /// coverage.csv.
    Apc(ApcArgs),
    /// Re-render scatter charts from stored snapshot CSVs.
    Snapshot(SnapshotArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config file; omitted keys fall back to environment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Environment: cartpole | highway. Overrides the config file.
    #[arg(long)]
    env: Option<EnvId>,
    /// Training episodes per run.
    #[arg(long)]
    episodes: Option<usize>,
    /// Episodes per coverage batch.
    #[arg(long)]
    batch_episodes: Option<usize>,
    /// Grid resolution G.
    #[arg(long)]
    grid_cells: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Run seed; defaults to the first configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Schedule initial states with the coverage maximizer.
    #[arg(long)]
    maximize: bool,
}

#[derive(Args)]
struct ApcArgs {
    /// A single run directory (contains coverage.csv and snapshot_*.csv).
    #[arg(long)]
    run: PathBuf,
    /// Grid resolution; inferred from coverage.csv when omitted.
    #[arg(long)]
    grid_cells: Option<usize>,
}

#[derive(Args)]
struct SnapshotArgs {
    /// A single run directory containing snapshot_*.csv files.
    #[arg(long)]
    run: PathBuf,
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = match (&args.config, args.env) {
        (Some(path), _) => ExperimentConfig::from_file(path).map_err(|e| e.to_string())?,
        (None, Some(env)) => ExperimentConfig::defaults(env),
        (None, None) => ExperimentConfig::defaults(EnvId::Cartpole),
    };
    if args.config.is_some() {
        if let Some(env) = args.env {
            cfg.environment = env;
        }
    }
    if let Some(v) = args.episodes {
        cfg.episodes = v;
    }
    if let Some(v) = args.batch_episodes {
        cfg.batch_episodes = v;
    }
    if let Some(v) = args.grid_cells {
        cfg.grid_cells = v;
    }
    if let Some(v) = &args.out {
        cfg.out_dir = v.clone();
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn cmd_train(args: &TrainArgs) -> Result<(), String> {
    let cfg = load_config(&args.config)?;
    let seed = args.seed.unwrap_or(cfg.seeds[0]);
    let result = run_training(&cfg, seed, args.maximize).map_err(|e| e.to_string())?;
    write_run_artifacts(&cfg.out_dir, &result).map_err(|e| e.to_string())?;
    write_file(&cfg.out_dir.join("config.toml"), &cfg.to_toml()).map_err(|e| e.to_string())?;

    let dir = cfg.out_dir.join(arm_name(result.maximized)).join(format!("seed{seed}"));
    result
        .network
        .save(&dir.join("qnet.txt"))
        .map_err(|e| format!("saving network: {e}"))?;

    println!(
        "{} seed {seed} ({}): {} episodes in {:.1?}",
        cfg.environment,
        arm_name(result.maximized),
        cfg.episodes,
        result.wall
    );
    println!("  final APC          {:.6}", result.final_apc);
    println!("  last-100 reward    {:.3}", last100_reward(&result.rewards));
    println!("  artifacts          {}", dir.display());
    Ok(())
}

fn cmd_experiment(args: &ConfigArgs) -> Result<(), String> {
    let cfg = load_config(args)?;
    let outcome = run_experiment(&cfg).map_err(|e| e.to_string())?;
    for failure in &outcome.failures {
        eprintln!(
            "warning: seed {} {} failed: {}",
            failure.seed,
            arm_name(failure.maximized),
            failure.message
        );
    }
    let s = &outcome.stats;
    println!(
        "{}: {} seeds × {} episodes, both arms",
        cfg.environment,
        cfg.seeds.len(),
        cfg.episodes
    );
    println!(
        "  final APC        baseline {:.6} ± {:.6}   maximized {:.6} ± {:.6}   Δ {:+.1}%",
        s.baseline.final_apc_mean,
        s.baseline.final_apc_std,
        s.maximized.final_apc_mean,
        s.maximized.final_apc_std,
        s.apc_delta_pct
    );
    println!(
        "  last-100 reward  baseline {:.3} ± {:.3}   maximized {:.3} ± {:.3}   Δ {:+.1}%",
        s.baseline.last100_mean,
        s.baseline.last100_std,
        s.maximized.last100_mean,
        s.maximized.last100_std,
        s.reward_delta_pct
    );
    println!("  artifacts        {}", cfg.out_dir.display());
    Ok(())
}

/// Snapshot CSVs of a run directory, in batch order.
fn snapshot_files(run: &Path) -> Result<Vec<PathBuf>, String> {
    let mut files = Vec::new();
    let entries =
        std::fs::read_dir(run).map_err(|e| format!("reading {}: {e}", run.display()))?;
    for entry in entries {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("snapshot_") && name.ends_with(".csv") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(format!("no snapshot_*.csv files in {}", run.display()));
    }
    Ok(files)
}

fn cmd_apc(args: &ApcArgs) -> Result<(), String> {
    let coverage_path = args.run.join("coverage.csv");
    let ledger =
        parse_coverage_csv(&read_file(&coverage_path).map_err(|e| e.to_string())?)
            .map_err(|e| format!("{}: {e}", coverage_path.display()))?;
    if ledger.rows().is_empty() {
        return Err("coverage.csv has no batches".into());
    }

    let grid_cells = match args.grid_cells {
        Some(g) => g,
        None => {
            // APC = occupied / G²  ⇒  G = √(occupied / APC).
            let row = ledger
                .rows()
                .iter()
                .find(|r| r.apc > 0.0)
                .ok_or("cannot infer grid size from an all-zero ledger")?;
            let g = (row.cum_occupied as f64 / row.apc).sqrt().round() as usize;
            println!("inferred grid_cells = {g}");
            g
        }
    };

    let files = snapshot_files(&args.run)?;
    if files.len() != ledger.rows().len() {
        return Err(format!(
            "{} snapshots but {} ledger rows",
            files.len(),
            ledger.rows().len()
        ));
    }

    let mut occ = OccupancySet::new(grid_cells);
    let mut all_match = true;
    println!("batch,stored_apc,recomputed_apc,match");
    for (file, row) in files.iter().zip(ledger.rows()) {
        let rows = parse_snapshot_csv(&read_file(file).map_err(|e| e.to_string())?)
            .map_err(|e| format!("{}: {e}", file.display()))?;
        let points: Vec<[f64; 2]> = rows.iter().map(|r| [r[0], r[1]]).collect();
        let limits = calculate_limits(&points).map_err(|e| e.to_string())?;
        let unit = normalize_embedding(&points, &limits).map_err(|e| e.to_string())?;
        let votes = histogram_vote(&unit, grid_cells);
        occ.accumulate(votes.into_iter().map(|(c, _)| c));
        let recomputed = occ.apc();
        let ok = recomputed == row.apc;
        all_match &= ok;
        println!("{},{},{},{}", row.batch, row.apc, recomputed, if ok { "yes" } else { "NO" });
    }
    if all_match {
        println!("APC recomputation matches coverage.csv");
        Ok(())
    } else {
        Err("recomputed APC differs from coverage.csv".into())
    }
}

fn cmd_snapshot(args: &SnapshotArgs) -> Result<(), String> {
    let files = snapshot_files(&args.run)?;
    for file in &files {
        let rows = parse_snapshot_csv(&read_file(file).map_err(|e| e.to_string())?)
            .map_err(|e| format!("{}: {e}", file.display()))?;
        let episode: usize = file
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.strip_prefix("snapshot_"))
            .and_then(|s| s.parse().ok())
            .unwrap_or(0);
        let svg = file.with_extension("svg");
        write_file(&svg, &snapshot_chart(&rows, episode).render()).map_err(|e| e.to_string())?;
        println!("wrote {}", svg.display());
    }
    println!("{} charts rendered", files.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Apc(args) => cmd_apc(args),
        Command::Snapshot(args) => cmd_snapshot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
