//! The chance-passing allocator for adversarial arrivals.
//!
//! Each arriving item is typed by its value-descending agent permutation
//! `tau` and its bucket-index vector `w` (see [`crate::discretize`]). The
//! item is offered to agents in ascending order of valuation: the agent at
//! rank i holds a chance counter keyed by `(tau; w_1..w_i)`, takes the item
//! when that counter fills to i, and passes otherwise. The rank-1 agent
//! never passes, so every item is placed.
//!
//! This evens out each type bucket: for every prefix key, the rank-k agent
//! owns at least a 1/n fraction of the bucket minus one item, which yields
//! the per-agent guarantee
//! `v_i(A_i) >= (1-eps)/n * v_i(M) - (n!)^2 / eps^n`.

use std::collections::BTreeMap;

use crate::discretize::{item_type, TypeKey};
use crate::domain::ValueVector;

use super::{check_dimension, AllocatorError, Decision, OnlineAllocator};

pub struct PassChain {
    utilities: Vec<f64>,
    epsilon: f64,
    counters: BTreeMap<TypeKey, u64>,
}

impl PassChain {
    pub fn new(n: usize, epsilon: f64) -> Result<Self, AllocatorError> {
        assert!(n >= 1);
        if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
            return Err(AllocatorError::InvalidEpsilon(epsilon));
        }
        Ok(Self {
            utilities: vec![0.0; n],
            epsilon,
            counters: BTreeMap::new(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The chance counters by type prefix. Only touched keys are stored, so
    /// memory stays proportional to distinct types seen times n.
    pub fn counters(&self) -> &BTreeMap<TypeKey, u64> {
        &self.counters
    }

    /// The full-length type this allocator assigns to an item.
    pub fn type_of(&self, item: &ValueVector) -> TypeKey {
        item_type(item, self.epsilon)
    }
}

impl OnlineAllocator for PassChain {
    fn n(&self) -> usize {
        self.utilities.len()
    }

    fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    fn name(&self) -> String {
        format!("pass_chain(eps={})", self.epsilon)
    }

    fn step(&mut self, item: &ValueVector) -> Result<Decision, AllocatorError> {
        check_dimension(self.n(), item)?;
        let n = self.n();
        let full = item_type(item, self.epsilon);
        let mut scores = vec![0.0; n];
        let mut receiver = None;
        for rank in (1..=n).rev() {
            let key = full.prefix(rank);
            let agent = full.agent_at_rank(rank);
            match receiver {
                None => {
                    let counter = self.counters.entry(key).or_insert(0);
                    *counter += 1;
                    scores[agent] = *counter as f64;
                    if *counter == rank as u64 {
                        *counter = 0;
                        receiver = Some(agent);
                    }
                }
                Some(_) => {
                    // Ranks below the taker are not offered a chance; report
                    // their stored counters untouched.
                    scores[agent] = self.counters.get(&key).copied().unwrap_or(0) as f64;
                }
            }
        }
        let agent = receiver.expect("rank-1 counter always fires");
        self.utilities[agent] += item.get(agent);
        Ok(Decision { agent, scores })
    }
}
