//! FIFO experience replay.

use std::collections::VecDeque;

use rand::Rng;

use crate::environment::Observation;
use crate::error::{Error, Result};

/// One environment transition `(s, a, r, s', done)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: Observation,
    pub action_index: usize,
    pub reward: f64,
    pub next_state: Observation,
    pub done: bool,
}

/// Bounded transition store; inserting into a full memory evicts the oldest
/// element.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    buffer: VecDeque<Transition>,
    capacity: usize,
    pushed: u64,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        Self {
            buffer: VecDeque::with_capacity(capacity.min(1 << 20)),
            capacity: capacity.max(1),
            pushed: 0,
        }
    }

    pub fn push(&mut self, transition: Transition) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(transition);
        self.pushed += 1;
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total insertions over the memory's lifetime.
    pub fn total_pushed(&self) -> u64 {
        self.pushed
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.buffer.iter()
    }

    /// Uniform minibatch without replacement. Does not mutate the memory.
    pub fn sample_minibatch<R: Rng>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<Transition>> {
        if self.buffer.len() < batch_size {
            return Err(Error::ReplayNotReady { have: self.buffer.len(), need: batch_size });
        }
        let indices = rand::seq::index::sample(rng, self.buffer.len(), batch_size);
        Ok(indices.iter().map(|i| self.buffer[i]).collect())
    }
}
