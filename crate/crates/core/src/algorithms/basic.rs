//! The two baseline allocators: uniform random and round robin.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::ValueVector;

use super::{check_dimension, AllocatorError, Decision, OnlineAllocator};

/// Allocates each item to an agent drawn uniformly at random from a seeded,
/// reproducible stream.
pub struct Random {
    utilities: Vec<f64>,
    rng: ChaCha8Rng,
    seed: u64,
}

impl Random {
    pub fn new(n: usize, seed: u64) -> Self {
        assert!(n >= 1);
        Self {
            utilities: vec![0.0; n],
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }
}

impl OnlineAllocator for Random {
    fn n(&self) -> usize {
        self.utilities.len()
    }

    fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    fn name(&self) -> String {
        format!("random(seed={})", self.seed)
    }

    fn step(&mut self, item: &ValueVector) -> Result<Decision, AllocatorError> {
        check_dimension(self.n(), item)?;
        let n = self.n();
        let agent = self.rng.gen_range(0..n);
        self.utilities[agent] += item.get(agent);
        Ok(Decision {
            agent,
            scores: vec![1.0 / n as f64; n],
        })
    }
}

/// Item j goes to agent j mod n.
pub struct RoundRobin {
    utilities: Vec<f64>,
    arrivals: usize,
}

impl RoundRobin {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        Self {
            utilities: vec![0.0; n],
            arrivals: 0,
        }
    }
}

impl OnlineAllocator for RoundRobin {
    fn n(&self) -> usize {
        self.utilities.len()
    }

    fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    fn name(&self) -> String {
        "round_robin".to_string()
    }

    fn step(&mut self, item: &ValueVector) -> Result<Decision, AllocatorError> {
        check_dimension(self.n(), item)?;
        let agent = self.arrivals % self.n();
        self.arrivals += 1;
        self.utilities[agent] += item.get(agent);
        let mut scores = vec![0.0; self.n()];
        scores[agent] = 1.0;
        Ok(Decision { agent, scores })
    }
}
