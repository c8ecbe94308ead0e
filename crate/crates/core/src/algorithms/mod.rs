//! The online allocators behind one streaming interface: observe one value
//! vector, pick the receiving agent, update internal state.
//!
//! Five allocators live here:
//!
//! - [`Random`]: each item to an agent drawn uniformly at random;
//! - [`RoundRobin`]: item j to agent j mod n;
//! - [`Greedy`]: maximize the marginal gain of a monotone potential;
//! - [`PassChain`]: type-bucketed chance passing — agents are offered each
//!   item in ascending order of valuation and pass until their chance
//!   counter for the item's type prefix fills up;
//! - [`Discounted`]: maximize the value exponentially discounted by the
//!   utility accumulated so far.
//!
//! Each allocator instance is single-owner state for one trial; parallelism
//! comes from running independent instances, never from sharing one.

mod basic;
mod discounted;
mod greedy;
mod pass_chain;

pub use basic::{Random, RoundRobin};
pub use discounted::Discounted;
pub use greedy::{Greedy, Phi};
pub use pass_chain::PassChain;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::ValueVector;

#[derive(Debug, Clone, PartialEq)]
pub enum AllocatorError {
    /// `eps` must lie strictly inside (0, 1).
    InvalidEpsilon(f64),
    /// The power family needs a finite positive exponent.
    InvalidPhiPower(f64),
    /// A potential evaluated to a non-finite number; the step is aborted.
    PhiNotFinite { agent: usize, at: f64 },
    /// The arriving item has the wrong number of agents.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for AllocatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidEpsilon(eps) => write!(f, "epsilon {eps} outside (0,1)"),
            Self::InvalidPhiPower(p) => write!(f, "phi power {p} is not a finite positive real"),
            Self::PhiNotFinite { agent, at } => {
                write!(
                    f,
                    "phi evaluated to a non-finite value at {at} for agent {}",
                    agent + 1
                )
            }
            Self::DimensionMismatch { expected, got } => {
                write!(f, "item has {got} values, allocator expects {expected}")
            }
        }
    }
}

impl std::error::Error for AllocatorError {}

/// The outcome of one step: the receiving agent plus the per-agent scores
/// the selection was based on (diagnostics for trace logs; their meaning is
/// allocator specific).
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub agent: usize,
    pub scores: Vec<f64>,
}

/// One online allocator mid-run.
pub trait OnlineAllocator {
    /// Number of agents.
    fn n(&self) -> usize;

    /// Accumulated utility per agent.
    fn utilities(&self) -> &[f64];

    /// Allocator id, matching its spec (e.g. `pass_chain(eps=0.25)`).
    fn name(&self) -> String;

    /// Observe one item, allocate it, and update state.
    fn step(&mut self, item: &ValueVector) -> Result<Decision, AllocatorError>;
}

/// Builds fresh allocator states for trials. Implemented by
/// [`AllocatorSpec`]; library users may implement it for custom allocators
/// (e.g. a [`Greedy`] with a user-supplied potential).
pub trait AllocatorFactory: Sync {
    /// Builds a fresh state. `seed` is the trial's random stream; the
    /// deterministic allocators ignore it.
    fn build(&self, n: usize, seed: u64) -> Result<Box<dyn OnlineAllocator>, AllocatorError>;
    fn id(&self) -> String;
    /// Whether two runs on the same input produce the same trace regardless
    /// of seed.
    fn deterministic(&self) -> bool;
}

/// Declarative description of an allocator, as named in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AllocatorSpec {
    Random,
    RoundRobin,
    Greedy { phi: Phi },
    PassChain { epsilon: f64 },
    Discounted { epsilon: f64 },
}

impl AllocatorFactory for AllocatorSpec {
    fn build(&self, n: usize, seed: u64) -> Result<Box<dyn OnlineAllocator>, AllocatorError> {
        Ok(match self {
            Self::Random => Box::new(Random::new(n, seed)),
            Self::RoundRobin => Box::new(RoundRobin::new(n)),
            Self::Greedy { phi } => Box::new(Greedy::new(n, *phi)?),
            Self::PassChain { epsilon } => Box::new(PassChain::new(n, *epsilon)?),
            Self::Discounted { epsilon } => Box::new(Discounted::new(n, *epsilon)?),
        })
    }

    fn id(&self) -> String {
        match self {
            Self::Random => "random".to_string(),
            Self::RoundRobin => "round_robin".to_string(),
            Self::Greedy { phi } => format!("greedy({phi})"),
            Self::PassChain { epsilon } => format!("pass_chain(eps={epsilon})"),
            Self::Discounted { epsilon } => format!("discounted(eps={epsilon})"),
        }
    }

    fn deterministic(&self) -> bool {
        !matches!(self, Self::Random)
    }
}

pub(crate) fn check_dimension(expected: usize, item: &ValueVector) -> Result<(), AllocatorError> {
    if item.n() != expected {
        return Err(AllocatorError::DimensionMismatch {
            expected,
            got: item.n(),
        });
    }
    Ok(())
}
