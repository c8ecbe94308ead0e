//! Greedy-type allocators: give the item to the agent whose potential gains
//! the most.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::ValueVector;

use super::{check_dimension, AllocatorError, Decision, OnlineAllocator};

/// The built-in family of monotone increasing potentials. Closed and
/// enumerable so verification suites can sweep it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phi {
    Identity,
    Sqrt,
    Power {
        p: f64,
    },
    /// log(1 + x).
    ShiftedLog,
}

impl Phi {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Identity => x,
            Self::Sqrt => x.sqrt(),
            Self::Power { p } => x.powf(p),
            Self::ShiftedLog => x.ln_1p(),
        }
    }

    /// Every member of the closed family, for suites that sweep it. The
    /// power representative is cubic, an aggressively convex potential.
    pub fn all() -> Vec<Phi> {
        vec![
            Phi::Identity,
            Phi::Sqrt,
            Phi::Power { p: 3.0 },
            Phi::ShiftedLog,
        ]
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "identity"),
            Self::Sqrt => write!(f, "sqrt"),
            Self::Power { p } => write!(f, "power:{p}"),
            Self::ShiftedLog => write!(f, "log1p"),
        }
    }
}

impl FromStr for Phi {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Self::Identity),
            "sqrt" => Ok(Self::Sqrt),
            "log1p" => Ok(Self::ShiftedLog),
            other => match other.strip_prefix("power:") {
                Some(p) => {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| format!("bad power exponent in {other:?}"))?;
                    Ok(Self::Power { p })
                }
                None => Err(format!(
                    "unknown phi {other:?} (expected identity, sqrt, log1p, or power:<p>)"
                )),
            },
        }
    }
}

enum Potential {
    Named(Phi),
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl Potential {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Named(phi) => phi.eval(x),
            Self::Custom { f, .. } => f(x),
        }
    }

    fn name(&self) -> String {
        match self {
            Self::Named(phi) => phi.to_string(),
            Self::Custom { name, .. } => format!("custom:{name}"),
        }
    }
}

/// Allocates each item to the agent maximizing `phi(u_i + v_i) - phi(u_i)`,
/// ties broken by ascending agent index.
pub struct Greedy {
    utilities: Vec<f64>,
    phi: Potential,
}

impl Greedy {
    pub fn new(n: usize, phi: Phi) -> Result<Self, AllocatorError> {
        assert!(n >= 1);
        if let Phi::Power { p } = phi {
            if !p.is_finite() || p <= 0.0 {
                return Err(AllocatorError::InvalidPhiPower(p));
            }
        }
        Ok(Self {
            utilities: vec![0.0; n],
            phi: Potential::Named(phi),
        })
    }

    /// A greedy allocator over a user-supplied monotone increasing
    /// potential. Callers are responsible for monotonicity; evaluation
    /// failures still abort the step with a diagnostic.
    pub fn with_custom_phi(
        n: usize,
        name: impl Into<String>,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Self {
        assert!(n >= 1);
        Self {
            utilities: vec![0.0; n],
            phi: Potential::Custom {
                name: name.into(),
                f,
            },
        }
    }
}

impl OnlineAllocator for Greedy {
    fn n(&self) -> usize {
        self.utilities.len()
    }

    fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    fn name(&self) -> String {
        format!("greedy({})", self.phi.name())
    }

    fn step(&mut self, item: &ValueVector) -> Result<Decision, AllocatorError> {
        check_dimension(self.n(), item)?;
        let mut scores = Vec::with_capacity(self.n());
        for (agent, &u) in self.utilities.iter().enumerate() {
            let before = self.phi.eval(u);
            let after = self.phi.eval(u + item.get(agent));
            let marginal = after - before;
            if !marginal.is_finite() {
                return Err(AllocatorError::PhiNotFinite {
                    agent,
                    at: u + item.get(agent),
                });
            }
            scores.push(marginal);
        }
        let mut agent = 0;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[agent] {
                agent = i;
            }
        }
        self.utilities[agent] += item.get(agent);
        Ok(Decision { agent, scores })
    }
}
