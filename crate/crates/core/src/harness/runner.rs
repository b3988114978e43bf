//! Single-run training loop tying the pieces together.
//!
//! One run = one seed × one arm (baseline or maximized). Every stochastic
//! component draws from its own named stream of the run seed, so the two
//! arms of a seed share the identical network initialization, action noise,
//! and replay sampling — the only difference is where episodes start.

use std::time::{Duration, Instant};

use crate::agent::{
    dqn_train_step, q_of_first_action, select_action, sync_target, QNetwork, ReplayBuffer,
    Transition,
};
use crate::coverage::{assess_batch, CoverageConfig, CoverageLedger, OccupancySet};
use crate::embed::StateBuffer;
use crate::envs::{CartpoleEnv, CartpoleInitSpace, Environment, HighwayEnv, HighwayInitSpace};
use crate::harness::config::{EnvId, ExperimentConfig};
use crate::harness::csvio::TraceRow;
use crate::maximizer::{InitSpace, Scheduler, SchedulerParams};
use crate::rng::{stream_rng, Stream};

use super::HarnessError;

/// Embedded states and their first-action q-values at one batch boundary.
#[derive(Debug, Clone)]
pub struct Snapshot {
    /// Episode count at which the batch closed (k, 2k, ...).
    pub episode: usize,
    /// `[x, y, q_first]` per embedded state.
    pub rows: Vec<[f64; 3]>,
    /// The original observations behind each row, for recomputation.
    pub states: Vec<Vec<f64>>,
}

/// Everything a finished run reports.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub maximized: bool,
    /// Cumulative reward per episode, length N.
    pub rewards: Vec<f64>,
    /// Steps survived per episode, length N.
    pub steps: Vec<usize>,
    pub ledger: CoverageLedger,
    /// Scheduler decisions; empty for the baseline arm.
    pub trace: Vec<TraceRow>,
    pub snapshots: Vec<Snapshot>,
    pub final_apc: f64,
    /// Trained online network at the end of the run.
    pub network: QNetwork,
    /// Wall-clock duration; reported but never written into CSVs.
    pub wall: Duration,
}

/// Run one training arm to completion.
pub fn run_training(
    config: &ExperimentConfig,
    seed: u64,
    maximize: bool,
) -> Result<RunResult, HarnessError> {
    match config.environment {
        EnvId::Cartpole => {
            let env = CartpoleEnv::new(Default::default());
            let space = CartpoleInitSpace::new(Default::default());
            run_training_impl(config, seed, maximize, env, space)
        }
        EnvId::Highway => {
            let env = HighwayEnv::new(Default::default());
            let space = HighwayInitSpace::new(Default::default());
            run_training_impl(config, seed, maximize, env, space)
        }
    }
}

fn run_training_impl<E: Environment, S: InitSpace>(
    config: &ExperimentConfig,
    seed: u64,
    maximize: bool,
    mut env: E,
    space: S,
) -> Result<RunResult, HarnessError> {
    let start = Instant::now();
    let fail = |episode: usize, message: String| HarnessError::Run {
        seed,
        maximized: maximize,
        episode,
        message,
    };

    let mut net_rng = stream_rng(seed, Stream::NetInit);
    let mut action_rng = stream_rng(seed, Stream::Action);
    let mut reset_rng = stream_rng(seed, Stream::EnvReset);
    let mut replay_rng = stream_rng(seed, Stream::Replay);
    let mut sched_rng = stream_rng(seed, Stream::Scheduler);

    let shapes = config.dqn.shapes(env.obs_dim(), env.n_actions());
    let mut online = QNetwork::new(&shapes, &mut net_rng);
    let mut target = online.clone();
    let mut replay = ReplayBuffer::new(config.dqn.buffer_capacity);

    let mut scheduler = if maximize {
        let mut sp = SchedulerParams::new(config.maximizer.rrt_dist);
        sp.epsilon_decay = config.maximizer.epsilon_decay;
        sp.sigma_fraction = config.maximizer.sigma_fraction;
        Some(Scheduler::new(space, sp))
    } else {
        None
    };

    let cov_config = CoverageConfig {
        grid_cells: config.grid_cells,
        subsample_max: config.subsample_max,
        tsne: config.tsne.clone(),
    };
    let mut buffer = StateBuffer::new(env.obs_dim());
    let mut occ = OccupancySet::new(config.grid_cells);
    let mut ledger = CoverageLedger::new();
    let mut snapshots = Vec::new();

    let mut rewards = Vec::with_capacity(config.episodes);
    let mut steps = Vec::with_capacity(config.episodes);
    let mut global_step: usize = 0;

    for episode in 0..config.episodes {
        let eps = config.dqn.action_epsilon(episode);
        let (record, mut obs) = match scheduler.as_mut() {
            Some(sched) => {
                let (id, init) = sched
                    .next_init_state(&mut sched_rng)
                    .map_err(|e| fail(episode, format!("scheduler: {e}")))?;
                let obs = env
                    .reset_flat(&init)
                    .map_err(|e| fail(episode, format!("scheduled reset: {e}")))?;
                (Some(id), obs)
            }
            None => {
                let obs = env
                    .reset_sampled(&mut reset_rng)
                    .map_err(|e| fail(episode, format!("reset: {e}")))?;
                (None, obs)
            }
        };
        buffer.push(&obs);

        let mut ep_reward = 0.0;
        let mut ep_steps = 0usize;
        loop {
            let action = select_action(&online, &obs, eps, &mut action_rng)
                .map_err(|e| fail(episode, format!("action selection: {e}")))?;
            let out = env
                .step_index(action)
                .map_err(|e| fail(episode, format!("step: {e}")))?;
            ep_reward += out.reward;
            ep_steps += 1;
            global_step += 1;
            buffer.push(&out.obs);
            replay.push(Transition {
                state: obs,
                action,
                reward: out.reward,
                next_state: out.obs.clone(),
                terminal: out.terminal,
            });
            obs = out.obs;

            if replay.len() >= config.dqn.batch_size && global_step.is_multiple_of(config.train_every) {
                let batch = replay
                    .sample(config.dqn.batch_size, &mut replay_rng)
                    .map_err(|e| fail(episode, format!("replay: {e}")))?;
                dqn_train_step(&mut online, &target, &batch, &config.dqn)
                    .map_err(|e| fail(episode, format!("train step: {e}")))?;
            }
            if global_step.is_multiple_of(config.dqn.target_sync) {
                sync_target(&online, &mut target);
            }
            if out.terminal || out.truncated {
                break;
            }
        }
        rewards.push(ep_reward);
        steps.push(ep_steps);
        if let (Some(sched), Some(id)) = (scheduler.as_mut(), record) {
            sched
                .record_score(id, ep_reward)
                .map_err(|e| fail(episode, format!("score: {e}")))?;
        }

        if (episode + 1) % config.batch_episodes == 0 {
            let batch_idx = (episode + 1) / config.batch_episodes - 1;
            let mut tsne_rng = stream_rng(seed, Stream::Tsne(batch_idx as u64));
            let out = assess_batch(
                &mut buffer,
                &mut occ,
                &cov_config,
                batch_idx,
                (episode + 1 - config.batch_episodes, episode),
                &mut tsne_rng,
            )
            .map_err(|e| fail(episode, format!("coverage batch {batch_idx}: {e}")))?;
            ledger.push(out.row);

            let mut rows = Vec::with_capacity(out.embedding.len());
            for (state, point) in out.samples.iter().zip(&out.embedding) {
                let q = q_of_first_action(&online, state)
                    .map_err(|e| fail(episode, format!("snapshot q: {e}")))?;
                rows.push([point[0], point[1], q]);
            }
            snapshots.push(Snapshot { episode: episode + 1, rows, states: out.samples });
        }
    }

    let trace = scheduler
        .map(|sched| {
            sched
                .records()
                .iter()
                .map(|r| TraceRow {
                    episode: r.episode,
                    branch: r.branch,
                    abstraction: r.abstraction.clone(),
                    score: r.score.unwrap_or(f64::NAN),
                })
                .collect()
        })
        .unwrap_or_default();

    let final_apc = ledger.final_apc().unwrap_or(0.0);
    Ok(RunResult {
        seed,
        maximized: maximize,
        rewards,
        steps,
        ledger,
        trace,
        snapshots,
        final_apc,
        network: online,
        wall: start.elapsed(),
    })
}
