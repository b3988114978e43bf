//! Fixed-capacity transition store with ring-buffer overwrite semantics.

use super::AgentError;
use crate::rng::Rng;

/// One environment transition.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// True termination only — time-limit truncation still bootstraps.
    pub terminal: bool,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    data: Vec<Transition>,
    capacity: usize,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { data: Vec::with_capacity(capacity.min(4096)), capacity, cursor: 0 }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Store a transition, overwriting the oldest once full.
    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Sample `batch` distinct transitions uniformly at random.
    pub fn sample<'a>(
        &'a self,
        batch: usize,
        rng: &mut Rng,
    ) -> Result<Vec<&'a Transition>, AgentError> {
        if batch == 0 || self.data.len() < batch {
            return Err(AgentError::BufferTooSmall { len: self.data.len(), batch });
        }
        let idx = rand::seq::index::sample(rng, self.data.len(), batch);
        Ok(idx.iter().map(|i| &self.data[i]).collect())
    }
}
