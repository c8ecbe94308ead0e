//! I.i.d. value-vector samplers.
//!
//! Every sampler is a deterministic function of (parameters, seed), so
//! trials can be farmed out to workers without losing reproducibility.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::ValueVector;

use super::AdversaryError;

/// Tolerance for a discrete table's probability mass summing to one.
pub const MASS_SLACK: f64 = 1e-12;

/// What one draw looks like.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplerKind {
    /// The known-i.i.d. hardness distribution for even n: the indicator
    /// vector of agent i with probability 2/(3n) for each i, and the pair
    /// indicator chi_{2k-1} + chi_{2k} with probability 2/(3n) for each of
    /// the n/2 adjacent pairs. Total mass 2/3 + 1/3 = 1.
    Matching { n: usize },
    /// The same vector every arrival.
    Constant { item: ValueVector },
    /// A finite table of (vector, probability) atoms.
    Discrete { atoms: Vec<(ValueVector, f64)> },
    /// Independent uniform [0,1] value per agent.
    Uniform { n: usize },
}

impl SamplerKind {
    pub fn validate(&self) -> Result<(), AdversaryError> {
        match self {
            Self::Matching { n } => {
                if *n < 2 || n % 2 != 0 {
                    return Err(AdversaryError::InvalidParameter {
                        name: "n",
                        message: format!("matching distribution needs even n >= 2, got {n}"),
                    });
                }
            }
            Self::Constant { .. } => {}
            Self::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(AdversaryError::InvalidParameter {
                        name: "atoms",
                        message: "empty table".into(),
                    });
                }
                let n = atoms[0].0.n();
                let mut mass = 0.0;
                for (item, p) in atoms {
                    if item.n() != n {
                        return Err(AdversaryError::InvalidParameter {
                            name: "atoms",
                            message: "ragged vectors in table".into(),
                        });
                    }
                    if !p.is_finite() || *p < 0.0 {
                        return Err(AdversaryError::InvalidParameter {
                            name: "atoms",
                            message: format!("bad probability {p}"),
                        });
                    }
                    mass += p;
                }
                if (mass - 1.0).abs() > MASS_SLACK {
                    return Err(AdversaryError::InvalidParameter {
                        name: "atoms",
                        message: format!("probabilities sum to {mass}, not 1"),
                    });
                }
            }
            Self::Uniform { n } => {
                if *n == 0 {
                    return Err(AdversaryError::InvalidParameter {
                        name: "n",
                        message: "need at least one agent".into(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Matching { n } | Self::Uniform { n } => *n,
            Self::Constant { item } => item.n(),
            Self::Discrete { atoms } => atoms[0].0.n(),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Self::Matching { n } => format!("iid_matching(n={n})"),
            Self::Constant { item } => format!("iid_constant({:?})", item.values()),
            Self::Discrete { atoms } => format!("iid_discrete({} atoms)", atoms.len()),
            Self::Uniform { n } => format!("iid_uniform(n={n})"),
        }
    }

    /// Exact offline optimum of an m-item sequence, when the distribution
    /// certifies one analytically. Only the constant sampler does: every
    /// arrival is the same vector, so the optimum is a pure counting
    /// problem (the best `t` such that giving each agent i
    /// `ceil(t / v_i)` items fits into m).
    pub fn certified_opt(&self, m: usize) -> Option<f64> {
        match self {
            Self::Constant { item } => Some(constant_instance_opt(item.values(), m)),
            _ => None,
        }
    }
}

/// Offline optimum for m copies of one value vector.
fn constant_instance_opt(values: &[f64], m: usize) -> f64 {
    if m == 0 || values.contains(&0.0) {
        return 0.0;
    }
    // Candidate welfare levels are c * v_i; test each for feasibility:
    // sum_i ceil(t / v_j) <= m. Robust ceil: shave a relative hair so
    // t = c * v_j does not round up to c + 1.
    let need = |t: f64, v: f64| -> usize { ((t / v) * (1.0 - 1e-12)).ceil() as usize };
    let feasible = |t: f64| -> bool { values.iter().map(|&v| need(t, v)).sum::<usize>() <= m };
    let mut best = 0.0f64;
    for &v in values {
        for c in 1..=m {
            let t = c as f64 * v;
            if t > best && feasible(t) {
                best = t;
            }
        }
    }
    best
}

/// A sampler kind with its per-trial random stream.
pub struct IIDSampler {
    kind: SamplerKind,
    rng: ChaCha8Rng,
}

impl IIDSampler {
    pub fn new(kind: SamplerKind, seed: u64) -> Result<Self, AdversaryError> {
        kind.validate()?;
        Ok(Self {
            kind,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn n(&self) -> usize {
        self.kind.n()
    }

    pub fn draw(&mut self) -> ValueVector {
        match &self.kind {
            SamplerKind::Matching { n } => {
                let n = *n;
                let atom = self.rng.gen_range(0..(3 * n / 2));
                let mut values = vec![0.0; n];
                if atom < n {
                    values[atom] = 1.0;
                } else {
                    let k = atom - n;
                    values[2 * k] = 1.0;
                    values[2 * k + 1] = 1.0;
                }
                ValueVector::new(values).expect("indicator vector")
            }
            SamplerKind::Constant { item } => item.clone(),
            SamplerKind::Discrete { atoms } => {
                let u: f64 = self.rng.gen();
                let mut acc = 0.0;
                for (item, p) in atoms {
                    acc += p;
                    if u < acc {
                        return item.clone();
                    }
                }
                atoms.last().expect("non-empty table").0.clone()
            }
            SamplerKind::Uniform { n } => {
                let values = (0..*n).map(|_| self.rng.gen::<f64>()).collect();
                ValueVector::new(values).expect("uniform values")
            }
        }
    }
}
