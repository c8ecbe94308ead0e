//! Core domain types: value vectors, instances, and allocations.
//!
//! All types here are immutable value objects once constructed, so they can
//! be shared freely across concurrent trial workers. Agents are indexed
//! `0..n` internally; human-facing output (CLI, CSV) renders them 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Absolute slack when cross-checking accumulated utilities against a
/// re-derivation from ownership.
pub const UTILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainError {
    /// A value vector or allocation has the wrong number of agents.
    DimensionMismatch { expected: usize, got: usize },
    /// An instance must have at least one agent.
    NoAgents,
    /// Item values must be finite and nonnegative.
    InvalidValue { agent: usize, value: f64 },
    /// An item value exceeds the instance's declared cap.
    ValueAboveCap { agent: usize, value: f64, eta: f64 },
    /// The declared value cap must be finite and positive.
    InvalidCap { eta: f64 },
    /// An owner index is outside `0..n`.
    OwnerOutOfRange { item: usize, owner: usize, n: usize },
    /// An allocation does not cover exactly the items of the instance.
    ItemCountMismatch { expected: usize, got: usize },
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} agents, got {got}")
            }
            Self::NoAgents => write!(f, "instance must have at least one agent"),
            Self::InvalidValue { agent, value } => {
                write!(
                    f,
                    "value {value} for agent {} is not a finite nonnegative real",
                    agent + 1
                )
            }
            Self::ValueAboveCap { agent, value, eta } => {
                write!(
                    f,
                    "value {value} for agent {} exceeds the cap {eta}",
                    agent + 1
                )
            }
            Self::InvalidCap { eta } => write!(f, "value cap {eta} is not a finite positive real"),
            Self::OwnerOutOfRange { item, owner, n } => {
                write!(
                    f,
                    "item {} owned by agent {} outside 1..={n}",
                    item + 1,
                    owner + 1
                )
            }
            Self::ItemCountMismatch { expected, got } => {
                write!(f, "allocation covers {got} items, instance has {expected}")
            }
        }
    }
}

impl std::error::Error for DomainError {}

/// One item's values for all `n` agents.
///
/// Entries are finite nonnegative reals. Whether they respect a value cap is
/// checked when the vector joins an [`Instance`], since the cap is declared
/// per instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueVector(Vec<f64>);

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self, DomainError> {
        if values.is_empty() {
            return Err(DomainError::NoAgents);
        }
        for (agent, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(DomainError::InvalidValue { agent, value: v });
            }
        }
        Ok(Self(values))
    }

    /// Number of agents this vector is defined for.
    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, agent: usize) -> f64 {
        self.0[agent]
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// The same item with every value multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self, DomainError> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }
}

/// A finite ordered sequence of items. Item order is the arrival order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    n: usize,
    items: Vec<ValueVector>,
    eta: Option<f64>,
}

impl Instance {
    /// Builds an instance without a declared cap; values must lie in [0, 1].
    pub fn new(n: usize, items: Vec<ValueVector>) -> Result<Self, DomainError> {
        Self::with_cap(n, items, None)
    }

    /// Builds an instance with an optional declared value cap `eta`.
    ///
    /// Without a declared cap the default cap of 1 applies, matching the
    /// normalized valuation range. Declaring `eta > 1` admits larger values
    /// (for which `ind` returns negative indices).
    pub fn with_cap(
        n: usize,
        items: Vec<ValueVector>,
        eta: Option<f64>,
    ) -> Result<Self, DomainError> {
        if n == 0 {
            return Err(DomainError::NoAgents);
        }
        if let Some(eta) = eta {
            if !eta.is_finite() || eta <= 0.0 {
                return Err(DomainError::InvalidCap { eta });
            }
        }
        let cap = eta.unwrap_or(1.0);
        for item in &items {
            if item.n() != n {
                return Err(DomainError::DimensionMismatch {
                    expected: n,
                    got: item.n(),
                });
            }
            for (agent, &v) in item.values().iter().enumerate() {
                if v > cap {
                    return Err(DomainError::ValueAboveCap {
                        agent,
                        value: v,
                        eta: cap,
                    });
                }
            }
        }
        Ok(Self { n, items, eta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[ValueVector] {
        &self.items
    }

    pub fn item(&self, j: usize) -> &ValueVector {
        &self.items[j]
    }

    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    /// Agent `i`'s value for the entire item set, v_i(M).
    pub fn total_value(&self, agent: usize) -> f64 {
        self.items.iter().map(|item| item.get(agent)).sum()
    }

    /// The same instance with every value multiplied by `c > 0`. The cap is
    /// scaled along so the scaled values stay admissible.
    pub fn scaled(&self, c: f64) -> Result<Self, DomainError> {
        let items = self
            .items
            .iter()
            .map(|item| item.scaled(c))
            .collect::<Result<Vec<_>, _>>()?;
        let eta = Some(self.eta.unwrap_or(1.0) * c);
        Self::with_cap(self.n, items, eta)
    }
}

/// A partition of arrived items among agents, with per-agent running
/// utilities derived from ownership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    owner: Vec<usize>,
    utilities: Vec<f64>,
}

impl Allocation {
    /// Builds the allocation in which item `j` belongs to `owners[j]`.
    /// Utilities are accumulated in arrival order.
    pub fn from_owners(inst: &Instance, owners: &[usize]) -> Result<Self, DomainError> {
        if owners.len() != inst.m() {
            return Err(DomainError::ItemCountMismatch {
                expected: inst.m(),
                got: owners.len(),
            });
        }
        let mut utilities = vec![0.0; inst.n()];
        for (j, &owner) in owners.iter().enumerate() {
            if owner >= inst.n() {
                return Err(DomainError::OwnerOutOfRange {
                    item: j,
                    owner,
                    n: inst.n(),
                });
            }
            utilities[owner] += inst.item(j).get(owner);
        }
        Ok(Self {
            owner: owners.to_vec(),
            utilities,
        })
    }

    pub fn n(&self) -> usize {
        self.utilities.len()
    }

    pub fn m(&self) -> usize {
        self.owner.len()
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn owner_of(&self, item: usize) -> usize {
        self.owner[item]
    }

    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    /// Checks the partition property against `inst`: every item has exactly
    /// one in-range owner (structural, by construction) and stored utilities
    /// match a re-derivation from ownership within [`UTILITY_SLACK`].
    pub fn validate(&self, inst: &Instance) -> Result<(), DomainError> {
        if self.n() != inst.n() {
            return Err(DomainError::DimensionMismatch {
                expected: inst.n(),
                got: self.n(),
            });
        }
        let rederived = Self::from_owners(inst, &self.owner)?;
        for (agent, (&stored, &fresh)) in self
            .utilities
            .iter()
            .zip(rederived.utilities.iter())
            .enumerate()
        {
            if (stored - fresh).abs() > UTILITY_SLACK {
                return Err(DomainError::InvalidValue {
                    agent,
                    value: stored,
                });
            }
        }
        Ok(())
    }
}

/// The minimum utility over agents: the egalitarian social welfare of
/// `alloc` on `inst`. An agent owning nothing of value pins the welfare at 0.
pub fn egalitarian_welfare(alloc: &Allocation, inst: &Instance) -> Result<f64, DomainError> {
    if alloc.n() != inst.n() {
        return Err(DomainError::DimensionMismatch {
            expected: inst.n(),
            got: alloc.n(),
        });
    }
    if alloc.m() != inst.m() {
        return Err(DomainError::ItemCountMismatch {
            expected: inst.m(),
            got: alloc.m(),
        });
    }
    // n >= 1, so the fold is never empty.
    Ok(alloc
        .utilities()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Welfare of the assignment `owners` on `inst` without keeping the
/// allocation around; sums in arrival order, so it agrees bit-for-bit with
/// [`Allocation::from_owners`].
pub fn welfare_of_owners(inst: &Instance, owners: &[usize]) -> Result<f64, DomainError> {
    let alloc = Allocation::from_owners(inst, owners)?;
    egalitarian_welfare(&alloc, inst)
}
