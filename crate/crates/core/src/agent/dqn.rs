//! DQN training step, action selection, and target-network bookkeeping.

use super::network::{Gradients, QNetwork, Workspace};
use super::replay::Transition;
use super::AgentError;
use crate::rng::Rng;
use rand::Rng as _;

/// Learner hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DqnParams {
    pub gamma: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Hard-copy the target network every this many training steps.
    pub target_sync: usize,
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    /// Action-epsilon schedule: linear from `eps_start` to `eps_end` over
    /// `eps_decay_episodes` episodes, flat afterwards.
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_episodes: usize,
    /// Global gradient-norm clip.
    pub grad_clip: f64,
}

impl Default for DqnParams {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lr: 1e-3,
            batch_size: 64,
            buffer_capacity: 50_000,
            target_sync: 500,
            hidden: vec![64, 64],
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_episodes: 200,
            grad_clip: 10.0,
        }
    }
}

impl DqnParams {
    /// Action-exploration epsilon for a (0-based) episode index.
    pub fn action_epsilon(&self, episode: usize) -> f64 {
        if self.eps_decay_episodes == 0 || episode >= self.eps_decay_episodes {
            return self.eps_end;
        }
        let frac = episode as f64 / self.eps_decay_episodes as f64;
        self.eps_start + (self.eps_end - self.eps_start) * frac
    }

    /// Full layer shape vector for an environment's dimensions.
    pub fn shapes(&self, obs_dim: usize, n_actions: usize) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.hidden.len() + 2);
        s.push(obs_dim);
        s.extend_from_slice(&self.hidden);
        s.push(n_actions);
        s
    }
}

/// Bootstrapped TD targets: `y = r + gamma·max_a Q̂(s', a)` for transitions
/// that continue, `y = r` for true terminals.
pub fn td_targets(
    target_net: &QNetwork,
    batch: &[&Transition],
    gamma: f64,
) -> Result<Vec<f64>, AgentError> {
    let mut ws = Workspace::default();
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                Ok(t.reward)
            } else {
                let q = target_net.forward_cached(&t.next_state, &mut ws)?;
                let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok(t.reward + gamma * max)
            }
        })
        .collect()
}

/// Mean-squared error between Q(s, a) and fixed targets over a batch.
/// Shared by the training step and the finite-difference check.
pub fn batch_loss(
    net: &QNetwork,
    batch: &[&Transition],
    targets: &[f64],
) -> Result<f64, AgentError> {
    let mut ws = Workspace::default();
    let mut loss = 0.0;
    for (t, &y) in batch.iter().zip(targets) {
        let q = net.forward_cached(&t.state, &mut ws)?;
        let err = q[t.action] - y;
        loss += err * err;
    }
    Ok(loss / batch.len() as f64)
}

/// Loss and its gradient with respect to every network parameter.
pub fn batch_gradients(
    net: &QNetwork,
    batch: &[&Transition],
    targets: &[f64],
) -> Result<(f64, Gradients), AgentError> {
    let mut ws = Workspace::default();
    let mut grads = Gradients::zeros_like(net);
    let mut out_grad = vec![0.0; net.output_dim()];
    let mut scratch = Vec::new();
    let mut loss = 0.0;
    let inv_n = 1.0 / batch.len() as f64;
    for (t, &y) in batch.iter().zip(targets) {
        let q = net.forward_cached(&t.state, &mut ws)?;
        let err = q[t.action] - y;
        loss += err * err * inv_n;
        out_grad.iter_mut().for_each(|g| *g = 0.0);
        out_grad[t.action] = 2.0 * err * inv_n;
        net.backward_cached(&t.state, &ws, &out_grad, &mut grads, &mut scratch);
    }
    Ok((loss, grads))
}

/// One DQN update: build targets from the target network, take an SGD step
/// on the MSE with global gradient-norm clipping. Returns the pre-step loss.
pub fn dqn_train_step(
    net: &mut QNetwork,
    target_net: &QNetwork,
    batch: &[&Transition],
    params: &DqnParams,
) -> Result<f64, AgentError> {
    if batch.is_empty() {
        return Err(AgentError::EmptyBatch);
    }
    let targets = td_targets(target_net, batch, params.gamma)?;
    let (loss, mut grads) = batch_gradients(net, batch, &targets)?;
    if !loss.is_finite() {
        return Err(AgentError::NonFiniteLoss { loss });
    }
    let norm = grads.norm();
    if norm > params.grad_clip {
        grads.scale(params.grad_clip / norm);
    }
    net.apply_gradients(&grads, params.lr);
    Ok(loss)
}

/// Epsilon-greedy action choice: uniform with probability `epsilon_action`,
/// else the q-argmax with ties going to the lowest index.
pub fn select_action(
    net: &QNetwork,
    state: &[f64],
    epsilon_action: f64,
    rng: &mut Rng,
) -> Result<usize, AgentError> {
    debug_assert!((0.0..=1.0).contains(&epsilon_action));
    if rng.gen::<f64>() < epsilon_action {
        return Ok(rng.gen_range(0..net.output_dim()));
    }
    let q = net.forward(state)?;
    Ok(argmax_lowest(&q))
}

/// Index of the maximum; the earliest index wins ties.
pub fn argmax_lowest(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// Hard-copy the online parameters into the target network.
pub fn sync_target(net: &QNetwork, target_net: &mut QNetwork) {
    target_net.clone_from(net);
}

/// Q-value of the designated first action, used to color state snapshots.
pub fn q_of_first_action(net: &QNetwork, state: &[f64]) -> Result<f64, AgentError> {
    Ok(net.forward(state)?[0])
}
