use rand::Rng;

use crate::gridworld::Action;

#[derive(Debug, Clone, PartialEq)]
pub struct Experience<T> {
    pub state: Vec<T>,
    pub action: Action,
    pub reward: T,
    pub next_state: Vec<T>,
    pub terminal: bool,
}

/// Fixed-capacity ring; the oldest entry is overwritten once full.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    items: Vec<Experience<T>>,
    capacity: usize,
    next: usize,
}

impl<T: Clone> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            items: Vec::with_capacity(capacity.min(1 << 16)),
            capacity,
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, exp: Experience<T>) {
        if self.items.len() < self.capacity {
            self.items.push(exp);
        } else {
            self.items[self.next] = exp;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    pub fn get(&self, index: usize) -> Option<&Experience<T>> {
        self.items.get(index)
    }

    /// Uniform indices, drawn with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..batch).map(|_| rng.gen_range(0..self.items.len())).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<&Experience<T>> {
        self.sample_indices(batch, rng).into_iter().map(|i| &self.items[i]).collect()
    }
}
