//! Hardness inputs: static instance generators, adaptive adversaries that
//! watch the allocator's decisions, and i.i.d. samplers.
//!
//! Adaptive adversaries speak a strict turn protocol: the harness calls
//! [`AdaptiveSource::next`] with the receiver of the previously emitted
//! item (`None` on the first call), and gets either the next item or a stop
//! marker. Calling again after a stop is an error.

pub mod deficiency;
pub mod fixtures;
pub mod generators;
pub mod greedy_killer;
pub mod sampler;
pub mod zero_ratio;

pub use deficiency::{lambda, DeficiencyAdversary};
pub use greedy_killer::GreedyKiller;
pub use sampler::{IIDSampler, SamplerKind};
pub use zero_ratio::ZeroRatioAdversary;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{DomainError, ValueVector};

#[derive(Debug, Clone, PartialEq)]
pub enum AdversaryError {
    /// `next` was called again after the source stopped.
    AfterStop,
    /// The previous item's decision was expected (or not expected).
    ProtocolViolation(&'static str),
    /// A parameter is outside its admissible range.
    InvalidParameter {
        name: &'static str,
        message: String,
    },
    Domain(DomainError),
}

impl fmt::Display for AdversaryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AfterStop => write!(f, "source already stopped"),
            Self::ProtocolViolation(msg) => write!(f, "protocol violation: {msg}"),
            Self::InvalidParameter { name, message } => write!(f, "parameter {name}: {message}"),
            Self::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AdversaryError {}

impl From<DomainError> for AdversaryError {
    fn from(e: DomainError) -> Self {
        Self::Domain(e)
    }
}

/// Why a source stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The construction ran to its natural end.
    Exhausted,
    /// The deficiency adversary's round cap fired before its break
    /// condition; the run is flagged rather than asserted against.
    RoundCapReached,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceStep {
    Item(ValueVector),
    Stop(StopReason),
}

/// An input source that may react to the allocator's decisions.
pub trait AdaptiveSource {
    fn n(&self) -> usize;

    /// Emit the next item or stop. `last` carries the agent who received
    /// the previously emitted item and must be `None` exactly on the first
    /// call.
    fn next(&mut self, last: Option<usize>) -> Result<SourceStep, AdversaryError>;

    /// The offline optimum of the emitted sequence, when the construction
    /// certifies one analytically. Meaningful once the source has stopped.
    fn certified_opt(&self) -> Option<f64> {
        None
    }
}

/// Declarative description of an adaptive adversary, as named in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AdversarySpec {
    ZeroRatio {
        n: usize,
    },
    Deficiency {
        n: usize,
        r: f64,
        c: f64,
        #[serde(default)]
        round_cap: Option<usize>,
    },
    GreedyKiller {
        inverse_eps: u64,
    },
}

impl AdversarySpec {
    pub fn instantiate(&self) -> Result<Box<dyn AdaptiveSource>, AdversaryError> {
        Ok(match self {
            Self::ZeroRatio { n } => Box::new(ZeroRatioAdversary::new(*n)?),
            Self::Deficiency { n, r, c, round_cap } => {
                Box::new(DeficiencyAdversary::new(*n, *r, *c, *round_cap)?)
            }
            Self::GreedyKiller { inverse_eps } => Box::new(GreedyKiller::new(*inverse_eps)?),
        })
    }

    pub fn n(&self) -> usize {
        match self {
            Self::ZeroRatio { n } | Self::Deficiency { n, .. } => *n,
            Self::GreedyKiller { .. } => 2,
        }
    }

    pub fn id(&self) -> String {
        match self {
            Self::ZeroRatio { n } => format!("zero_ratio(n={n})"),
            Self::Deficiency { n, r, c, .. } => format!("deficiency(n={n};r={r};c={c})"),
            Self::GreedyKiller { inverse_eps } => format!("greedy_killer(eps=1/{inverse_eps})"),
        }
    }
}

/// The all-ones value vector.
pub(crate) fn ones(n: usize) -> ValueVector {
    ValueVector::new(vec![1.0; n]).expect("ones vector")
}

/// The all-ones vector with coordinate `agent` zeroed (1 - chi_agent).
pub(crate) fn ones_except(n: usize, agent: usize) -> ValueVector {
    let mut values = vec![1.0; n];
    values[agent] = 0.0;
    ValueVector::new(values).expect("punishment vector")
}
