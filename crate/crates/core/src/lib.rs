//! Coverage assessment and maximization laboratory for deep reinforcement
//! learning.
//!
//! The crate trains small DQN agents in two simulated environments (cartpole
//! and a simplified multi-vehicle highway), measures how much of the visited
//! state space the training process has touched, and optionally accelerates
//! that coverage by scheduling episode initial states.
//!
//! The pieces fit together like this:
//!
//! - [`envs`] provides deterministic, settable-initial-state simulators.
//! - [`agent`] is a hand-written DQN learner (MLP forward/backward, replay
//!   buffer, target network).
//! - [`embed`] projects buffered high-dimensional states to 2D with exact
//!   t-SNE.
//! - [`coverage`] grids the embedding, votes points into cells, and tracks
//!   the approximate pseudo-coverage (APC) ratio across batches.
//! - [`maximizer`] schedules episode initial states with an
//!   exploration/exploitation mix of RRT growth and perturbation of the best
//!   scoring known start.
//! - [`harness`] wires everything into reproducible, seeded experiments with
//!   CSV and SVG chart output.

pub mod agent;
pub mod coverage;
pub mod embed;
pub mod envs;
pub mod harness;
pub mod maximizer;
pub mod rng;
