//! The two-agent adversary that caps every greedy-type allocator at ratio
//! (3 - sqrt(5)) / 2.
//!
//! Phase 1 offers 1/eps^2 items valued (1, eps) and counts how many the
//! allocator hands to agent 2. If at most (3 - sqrt(5)) / (2 eps^2) of them
//! (branch A), the tail is 1/eps items valued (1, 0): agent 2 is starved
//! while the optimum reaches 1/eps. Otherwise (branch B) the tail is
//! floor((sqrt(5)-1) / (2 eps^2)) items valued (1, 1) followed by
//! ceil((1+sqrt(5)) / (2 eps^2)) items valued (0, 1), and the optimum is at
//! least (1+sqrt(5)) / (2 eps^2) - 1.
//!
//! `eps` must be the inverse of a positive integer, so the phase-1 length
//! 1/eps^2 is exact.

use crate::domain::ValueVector;

use super::{AdaptiveSource, AdversaryError, SourceStep, StopReason};

/// The greedy ceiling (3 - sqrt(5)) / 2, computed rather than hard-coded.
pub fn greedy_ratio_ceiling() -> f64 {
    (3.0 - 5f64.sqrt()) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Probe,
    TailA {
        remaining: u64,
    },
    TailB {
        both_remaining: u64,
        second_remaining: u64,
    },
    Stopped,
}

pub struct GreedyKiller {
    inverse_eps: u64,
    eps: f64,
    emitted_probe: u64,
    probe_to_agent2: u64,
    phase: Phase,
    pending_probe: bool,
    certified_opt: Option<f64>,
}

impl GreedyKiller {
    /// `inverse_eps` is 1/eps, a positive integer.
    pub fn new(inverse_eps: u64) -> Result<Self, AdversaryError> {
        if inverse_eps == 0 {
            return Err(AdversaryError::InvalidParameter {
                name: "inverse_eps",
                message: "must be a positive integer".into(),
            });
        }
        Ok(Self {
            inverse_eps,
            eps: 1.0 / inverse_eps as f64,
            emitted_probe: 0,
            probe_to_agent2: 0,
            phase: Phase::Probe,
            pending_probe: false,
            certified_opt: None,
        })
    }

    /// Validating constructor from a raw epsilon; rejects any eps whose
    /// inverse is not a positive integer.
    pub fn from_epsilon(eps: f64) -> Result<Self, AdversaryError> {
        if !eps.is_finite() || eps <= 0.0 || eps > 1.0 {
            return Err(AdversaryError::InvalidParameter {
                name: "epsilon",
                message: format!("{eps} outside (0, 1]"),
            });
        }
        let inv = 1.0 / eps;
        if (inv - inv.round()).abs() > 1e-9 {
            return Err(AdversaryError::InvalidParameter {
                name: "epsilon",
                message: format!("1/{eps} is not an integer"),
            });
        }
        Self::new(inv.round() as u64)
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    fn probe_len(&self) -> u64 {
        self.inverse_eps * self.inverse_eps
    }

    fn enter_tail(&mut self) {
        let q = self.inverse_eps as f64;
        let threshold = greedy_ratio_ceiling() * q * q;
        if (self.probe_to_agent2 as f64) <= threshold {
            self.phase = Phase::TailA {
                remaining: self.inverse_eps,
            };
            self.certified_opt = Some(q);
        } else {
            let both = ((5f64.sqrt() - 1.0) / 2.0 * q * q).floor() as u64;
            let second = ((1.0 + 5f64.sqrt()) / 2.0 * q * q).ceil() as u64;
            self.phase = Phase::TailB {
                both_remaining: both,
                second_remaining: second,
            };
            self.certified_opt = Some((1.0 + 5f64.sqrt()) / 2.0 * q * q - 1.0);
        }
    }
}

impl AdaptiveSource for GreedyKiller {
    fn n(&self) -> usize {
        2
    }

    fn next(&mut self, last: Option<usize>) -> Result<SourceStep, AdversaryError> {
        if self.phase == Phase::Stopped {
            return Err(AdversaryError::AfterStop);
        }
        match (self.emitted_probe, last) {
            (0, Some(_)) => {
                return Err(AdversaryError::ProtocolViolation(
                    "first call takes no decision",
                ))
            }
            (0, None) => {}
            (_, None) => {
                return Err(AdversaryError::ProtocolViolation(
                    "missing decision for last item",
                ))
            }
            (_, Some(receiver)) => {
                if receiver > 1 {
                    return Err(AdversaryError::ProtocolViolation("receiver out of range"));
                }
                if self.pending_probe {
                    self.pending_probe = false;
                    if receiver == 1 {
                        self.probe_to_agent2 += 1;
                    }
                    if self.emitted_probe == self.probe_len() {
                        self.enter_tail();
                    }
                }
            }
        }
        match self.phase {
            Phase::Probe => {
                self.emitted_probe += 1;
                self.pending_probe = true;
                Ok(SourceStep::Item(
                    ValueVector::new(vec![1.0, self.eps]).expect("probe item"),
                ))
            }
            Phase::TailA { remaining } => {
                if remaining == 0 {
                    self.phase = Phase::Stopped;
                    return Ok(SourceStep::Stop(StopReason::Exhausted));
                }
                self.phase = Phase::TailA {
                    remaining: remaining - 1,
                };
                Ok(SourceStep::Item(
                    ValueVector::new(vec![1.0, 0.0]).expect("tail item"),
                ))
            }
            Phase::TailB {
                both_remaining,
                second_remaining,
            } => {
                if both_remaining > 0 {
                    self.phase = Phase::TailB {
                        both_remaining: both_remaining - 1,
                        second_remaining,
                    };
                    Ok(SourceStep::Item(
                        ValueVector::new(vec![1.0, 1.0]).expect("tail item"),
                    ))
                } else if second_remaining > 0 {
                    self.phase = Phase::TailB {
                        both_remaining: 0,
                        second_remaining: second_remaining - 1,
                    };
                    Ok(SourceStep::Item(
                        ValueVector::new(vec![0.0, 1.0]).expect("tail item"),
                    ))
                } else {
                    self.phase = Phase::Stopped;
                    Ok(SourceStep::Stop(StopReason::Exhausted))
                }
            }
            Phase::Stopped => unreachable!("handled above"),
        }
    }

    fn certified_opt(&self) -> Option<f64> {
        self.certified_opt
    }
}
