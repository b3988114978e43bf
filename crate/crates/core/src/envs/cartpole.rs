//! Cart-pole balancing task.
//!
//! A pole is hinged to a cart that slides on a frictionless track; the agent
//! pushes the cart left or right with a fixed-magnitude force and earns +1 per
//! step until the pole tips past a configurable angle or the cart leaves the
//! track. Dynamics follow the classic control formulation with the customary
//! semi-implicit-free explicit Euler update: positions advance with the *old*
//! velocities, then velocities advance with the current accelerations. That
//! update order is part of the environment definition, not an accident, so the
//! tests pin it down.

use super::{EnvError, Environment, StepOutcome};
use crate::rng::Rng;
use rand::Rng as _;

/// Physical constants and episode limits.
#[derive(Debug, Clone)]
pub struct CartpoleParams {
    pub gravity: f64,
    pub masscart: f64,
    pub masspole: f64,
    /// Half the pole length; the torque arm used by the dynamics.
    pub half_length: f64,
    pub force_mag: f64,
    /// Integration step in seconds.
    pub tau: f64,
    /// Episode ends when |theta| exceeds this (radians).
    pub theta_threshold: f64,
    /// Episode ends when |x| exceeds this (meters).
    pub x_threshold: f64,
    /// Steps before truncation.
    pub max_steps: usize,
    /// Default reset draws each component from U[-reset_bound, reset_bound].
    pub reset_bound: f64,
}

impl Default for CartpoleParams {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            masscart: 1.0,
            masspole: 0.1,
            half_length: 0.5,
            force_mag: 10.0,
            tau: 0.02,
            // 15 degrees.
            theta_threshold: 15.0_f64.to_radians(),
            x_threshold: 2.4,
            max_steps: 500,
            reset_bound: 0.05,
        }
    }
}

/// Full dynamical state: cart position/velocity, pole angle/angular velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartpoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartpoleState {
    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.x_dot, self.theta, self.theta_dot]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            x: a[0],
            x_dot: a[1],
            theta: a[2],
            theta_dot: a[3],
        }
    }
}

/// Push direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CartAction {
    Left,
    Right,
}

impl CartAction {
    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(CartAction::Left),
            1 => Some(CartAction::Right),
            _ => None,
        }
    }

    fn force(self, mag: f64) -> f64 {
        match self {
            CartAction::Left => -mag,
            CartAction::Right => mag,
        }
    }
}

/// One explicit Euler step of the cart-pole dynamics under a constant force.
///
/// Position components use the velocities from the *start* of the step; the
/// velocity components then use the accelerations evaluated at the start of
/// the step. Pure function so tests can drive it directly.
pub fn integrate(p: &CartpoleParams, s: CartpoleState, force: f64) -> CartpoleState {
    let total_mass = p.masscart + p.masspole;
    let polemass_length = p.masspole * p.half_length;

    let (sin_t, cos_t) = super::sin_cos_unfused(s.theta);
    let temp = (force + polemass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
    let theta_acc = (p.gravity * sin_t - cos_t * temp)
        / (p.half_length * (4.0 / 3.0 - p.masspole * cos_t * cos_t / total_mass));
    let x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

    CartpoleState {
        x: s.x + p.tau * s.x_dot,
        x_dot: s.x_dot + p.tau * x_acc,
        theta: s.theta + p.tau * s.theta_dot,
        theta_dot: s.theta_dot + p.tau * theta_acc,
    }
}

/// Termination rule: pole past the angle limit or cart off the track.
pub fn is_terminal(p: &CartpoleParams, s: &CartpoleState) -> bool {
    s.x.abs() > p.x_threshold || s.theta.abs() > p.theta_threshold
}

/// The environment proper: parameters plus mutable episode state.
#[derive(Debug, Clone)]
pub struct CartpoleEnv {
    params: CartpoleParams,
    state: CartpoleState,
    steps: usize,
    finished: bool,
}

impl CartpoleEnv {
    pub fn new(params: CartpoleParams) -> Self {
        Self {
            params,
            state: CartpoleState::from_array([0.0; 4]),
            steps: 0,
            // Force a reset before the first step.
            finished: true,
        }
    }

    pub fn params(&self) -> &CartpoleParams {
        &self.params
    }

    pub fn state(&self) -> &CartpoleState {
        &self.state
    }

    /// Reset to an explicit state. Errors if any component is non-finite or
    /// the state is already terminal.
    pub fn reset_to(&mut self, state: CartpoleState) -> Result<Vec<f64>, EnvError> {
        let arr = state.to_array();
        for (i, v) in arr.iter().enumerate() {
            if !v.is_finite() {
                return Err(EnvError::NonFiniteInit { index: i });
            }
        }
        if state.x.abs() > self.params.x_threshold {
            return Err(EnvError::InitOutOfBounds {
                field: "x",
                value: state.x,
                lo: -self.params.x_threshold,
                hi: self.params.x_threshold,
            });
        }
        if state.theta.abs() > self.params.theta_threshold {
            return Err(EnvError::InitOutOfBounds {
                field: "theta",
                value: state.theta,
                lo: -self.params.theta_threshold,
                hi: self.params.theta_threshold,
            });
        }
        self.state = state;
        self.steps = 0;
        self.finished = false;
        Ok(arr.to_vec())
    }

    /// Advance one step.
    pub fn step(&mut self, action: CartAction) -> Result<StepOutcome, EnvError> {
        if self.finished {
            return Err(EnvError::StepOnFinished);
        }
        let force = action.force(self.params.force_mag);
        self.state = integrate(&self.params, self.state, force);
        self.steps += 1;

        let terminal = is_terminal(&self.params, &self.state);
        let truncated = !terminal && self.steps >= self.params.max_steps;
        self.finished = terminal || truncated;

        Ok(StepOutcome {
            obs: self.state.to_array().to_vec(),
            reward: 1.0,
            terminal,
            truncated,
        })
    }
}

impl Environment for CartpoleEnv {
    fn obs_dim(&self) -> usize {
        4
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn init_dim(&self) -> usize {
        4
    }

    fn reset_sampled(&mut self, rng: &mut Rng) -> Result<Vec<f64>, EnvError> {
        let b = self.params.reset_bound;
        let state = CartpoleState {
            x: rng.gen_range(-b..=b),
            x_dot: rng.gen_range(-b..=b),
            theta: rng.gen_range(-b..=b),
            theta_dot: rng.gen_range(-b..=b),
        };
        self.reset_to(state)
    }

    fn reset_flat(&mut self, init: &[f64]) -> Result<Vec<f64>, EnvError> {
        if init.len() != 4 {
            return Err(EnvError::InitLength {
                got: init.len(),
                expected: 4,
            });
        }
        self.reset_to(CartpoleState::from_array([init[0], init[1], init[2], init[3]]))
    }

    fn step_index(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        let act = CartAction::from_index(action).ok_or(EnvError::InvalidAction {
            action,
            count: 2,
        })?;
        self.step(act)
    }
}
