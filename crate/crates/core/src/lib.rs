//! Online max-min fair allocation.
//!
//! Items arrive one at a time and must be handed irrevocably to one of `n`
//! agents with additive valuations; the goal is to maximize the minimum
//! agent utility (egalitarian social welfare). This crate provides:
//!
//! - [`domain`]: value vectors, instances, allocations, and the welfare
//!   objective;
//! - [`discretize`]: the value-bucketing machinery behind the pass-chain
//!   allocator;
//! - [`algorithms`]: five online allocators behind one streaming interface;
//! - [`adversaries`]: hardness instance generators, adaptive adversaries,
//!   and i.i.d. samplers;
//! - [`oracle`]: an exact offline max-min optimum via branch and bound with
//!   an exhaustive fallback;
//! - [`harness`]: trial runners, competitive-ratio estimators, and
//!   guarantee verifiers with reproducible seeding and reports;
//! - [`jsonl`]: the instance file format.

pub mod adversaries;
pub mod algorithms;
pub mod discretize;
pub mod domain;
pub mod harness;
pub mod jsonl;
pub mod oracle;

#[cfg(test)]
pub(crate) mod testutil {
    use crate::domain::{Instance, ValueVector};

    pub fn vv(values: &[f64]) -> ValueVector {
        ValueVector::new(values.to_vec()).unwrap()
    }

    /// The introduction's six-snack instance (Alice's and Bob's values).
    pub fn snack_instance() -> Instance {
        let alice = [0.7, 1.0, 0.8, 0.9, 0.7, 0.8];
        let bob = [0.5, 0.1, 0.7, 0.2, 0.6, 0.0];
        let items = alice
            .iter()
            .zip(bob.iter())
            .map(|(&a, &b)| vv(&[a, b]))
            .collect();
        Instance::new(2, items).unwrap()
    }
}
