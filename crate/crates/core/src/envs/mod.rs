//! Simulation environments.
//!
//! Both environments are deterministic step functions over an explicit state,
//! expose a uniform reset/step interface, and accept fully specified initial
//! states so that an external scheduler can control where episodes begin.
//! Instances are independently owned; running many in parallel means one
//! instance per worker, never shared.

mod bicycle;
mod cartpole;
mod highway;
mod init_space;
mod traffic;

pub use bicycle::{bicycle_step, BicyclePose};
pub use cartpole::{CartAction, CartpoleEnv, CartpoleParams, CartpoleState};
pub use highway::{
    HighwayEnv, HighwayParams, HighwayRewardParams, HighwayState, LaneChangeEvent, Vehicle,
    HIGHWAY_ACTIONS,
};
pub use init_space::{CartpoleInitSpace, HighwayInitSpace};
pub use traffic::{idm_acceleration, mobil_decide, IdmParams, LaneDecision, MobilParams};

use crate::rng::Rng;
use thiserror::Error;

/// Sine and cosine of `x` as two independent libm calls.
///
/// When `sin(x)` and `cos(x)` of the same value sit next to each other, the
/// compiler may merge them into the platform's fused `sincos`, whose result
/// can differ from the separate calls in the last bit — and whether the merge
/// happens depends on inlining context and build profile. Long simulations
/// amplify that single bit into visibly different trajectories, so every
/// physics path routes through this helper, which uses an optimization
/// barrier to keep the two calls separate in every build.
pub(crate) fn sin_cos_unfused(x: f64) -> (f64, f64) {
    (std::hint::black_box(x).sin(), std::hint::black_box(x).cos())
}

/// Result of advancing an environment by one step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Observation of the next state, as the agent sees it.
    pub obs: Vec<f64>,
    /// Scalar reward for the transition.
    pub reward: f64,
    /// Episode ended by the environment's termination rule.
    pub terminal: bool,
    /// Episode ended by hitting the time limit.
    pub truncated: bool,
}

impl StepOutcome {
    /// True when the episode is over for either reason.
    pub fn finished(&self) -> bool {
        self.terminal || self.truncated
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called on a finished episode; reset first")]
    StepOnFinished,
    #[error("initial state out of bounds: {field} = {value} not within [{lo}, {hi}]")]
    InitOutOfBounds {
        field: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("initial state component {index} is not finite")]
    NonFiniteInit { index: usize },
    #[error(
        "vehicles {first} and {second} overlap in lane {lane}: \
         longitudinal gap {gap:.3} m is below the {min:.3} m minimum"
    )]
    OverlappingPlacement {
        first: usize,
        second: usize,
        lane: usize,
        gap: f64,
        min: f64,
    },
    #[error("invalid action index {action} for an environment with {count} actions")]
    InvalidAction { action: usize, count: usize },
    #[error("flat initial state has length {got}, expected {expected}")]
    InitLength { got: usize, expected: usize },
    #[error("could not sample a collision-free placement after {attempts} attempts")]
    PlacementRetriesExhausted { attempts: usize },
}

/// Uniform interface over the concrete environments, used by the training
/// harness and the initial-state scheduler.
///
/// Flat initial states use a documented per-environment layout:
/// cartpole is `[x, x_dot, theta, theta_dot]`; highway is
/// `[x_0, y_0, v_0, x_1, y_1, v_1, ...]` with vehicle 0 the ego.
pub trait Environment {
    /// Length of the observation vector.
    fn obs_dim(&self) -> usize;

    /// Number of discrete actions.
    fn n_actions(&self) -> usize;

    /// Length of the flat initial-state vector.
    fn init_dim(&self) -> usize;

    /// Reset using the environment's default sampling rule.
    fn reset_sampled(&mut self, rng: &mut Rng) -> Result<Vec<f64>, EnvError>;

    /// Reset to an explicit flat initial state.
    fn reset_flat(&mut self, init: &[f64]) -> Result<Vec<f64>, EnvError>;

    /// Advance one step with an action index.
    fn step_index(&mut self, action: usize) -> Result<StepOutcome, EnvError>;
}
