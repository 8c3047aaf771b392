//! Uniform-replay ring buffer.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use crate::env::{ActionVec, StateVec};

/// One stored environment transition. `terminal` marks true ends of the MDP
/// (solved or diverged); horizon truncations keep bootstrapping.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: StateVec,
    pub action: ActionVec,
    pub reward: f64,
    pub next_state: StateVec,
    pub terminal: bool,
}

/// Fixed-capacity ring buffer with uniform without-replacement batch
/// sampling.
pub struct ReplayBuffer {
    data: Vec<Transition>,
    capacity: usize,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        assert!(capacity > 0);
        ReplayBuffer {
            data: Vec::with_capacity(capacity.min(1 << 20)),
            capacity,
            next: 0,
        }
    }

    pub fn push(&mut self, transition: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(transition);
        } else {
            self.data[self.next] = transition;
        }
        self.next = (self.next + 1) % self.capacity;
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

    /// Uniform sample of `batch` distinct stored transitions.
    pub fn sample<'a>(&'a self, batch: usize, rng: &mut ChaCha8Rng) -> Vec<&'a Transition> {
        assert!(batch <= self.data.len(), "batch larger than buffer");
        sample(rng, self.data.len(), batch)
            .into_iter()
            .map(|i| &self.data[i])
            .collect()
    }
}
