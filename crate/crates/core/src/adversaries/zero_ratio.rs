//! The strict-ratio killer for deterministic allocators.
//!
//! Emits one all-ones item, watches who takes it, then emits n-1 items that
//! are worthless to some agent who did not take it (the highest-indexed
//! one). That victim's only valuable item is already gone, so any
//! deterministic allocator finishes with welfare 0 while the optimum is 1:
//! give the first item to the victim and one of the rest to everyone else.

use super::{ones, ones_except, AdaptiveSource, AdversaryError, SourceStep, StopReason};

pub struct ZeroRatioAdversary {
    n: usize,
    emitted: usize,
    victim: Option<usize>,
    stopped: bool,
}

impl ZeroRatioAdversary {
    pub fn new(n: usize) -> Result<Self, AdversaryError> {
        if n < 2 {
            return Err(AdversaryError::InvalidParameter {
                name: "n",
                message: "needs at least two agents".into(),
            });
        }
        Ok(Self {
            n,
            emitted: 0,
            victim: None,
            stopped: false,
        })
    }

    /// The agent the punishment items are worthless to, once chosen.
    pub fn victim(&self) -> Option<usize> {
        self.victim
    }
}

impl AdaptiveSource for ZeroRatioAdversary {
    fn n(&self) -> usize {
        self.n
    }

    fn next(&mut self, last: Option<usize>) -> Result<SourceStep, AdversaryError> {
        if self.stopped {
            return Err(AdversaryError::AfterStop);
        }
        match (self.emitted, last) {
            (0, None) => {
                self.emitted = 1;
                Ok(SourceStep::Item(ones(self.n)))
            }
            (0, Some(_)) => Err(AdversaryError::ProtocolViolation(
                "first call takes no decision",
            )),
            (_, None) => Err(AdversaryError::ProtocolViolation(
                "missing decision for last item",
            )),
            (emitted, Some(receiver)) => {
                if receiver >= self.n {
                    return Err(AdversaryError::ProtocolViolation("receiver out of range"));
                }
                let victim = *self.victim.get_or_insert_with(|| {
                    // Highest-indexed agent other than the first receiver.
                    if receiver == self.n - 1 {
                        self.n - 2
                    } else {
                        self.n - 1
                    }
                });
                if emitted < self.n {
                    self.emitted += 1;
                    Ok(SourceStep::Item(ones_except(self.n, victim)))
                } else {
                    self.stopped = true;
                    Ok(SourceStep::Stop(StopReason::Exhausted))
                }
            }
        }
    }

    fn certified_opt(&self) -> Option<f64> {
        Some(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ValueVector;

    fn drive(n: usize, decide: impl Fn(usize, &ValueVector) -> usize) -> Vec<(ValueVector, usize)> {
        let mut adv = ZeroRatioAdversary::new(n).unwrap();
        let mut last = None;
        let mut log = Vec::new();
        let mut j = 0;
        loop {
            match adv.next(last).unwrap() {
                SourceStep::Item(item) => {
                    let agent = decide(j, &item);
                    log.push((item, agent));
                    last = Some(agent);
                    j += 1;
                }
                SourceStep::Stop(reason) => {
                    assert_eq!(reason, StopReason::Exhausted);
                    return log;
                }
            }
        }
    }

    #[test]
    fn against_round_robin_two_agents() {
        let log = drive(2, |j, _| j % 2);
        assert_eq!(log.len(), 2);
        assert_eq!(log[0].0.values(), &[1.0, 1.0]);
        assert_eq!(log[1].0.values(), &[1.0, 0.0]);
    }

    #[test]
    fn against_an_allocator_favoring_agent_two() {
        let log = drive(2, |_, _| 1);
        assert_eq!(log[1].0.values(), &[0.0, 1.0]);
    }

    #[test]
    fn three_agents_first_item_to_agent_one() {
        let log = drive(3, |_, _| 0);
        assert_eq!(log.len(), 3);
        assert_eq!(log[1].0.values(), &[1.0, 1.0, 0.0]);
        assert_eq!(log[2].0.values(), &[1.0, 1.0, 0.0]);
    }

    #[test]
    fn errors_after_stop() {
        let mut adv = ZeroRatioAdversary::new(2).unwrap();
        adv.next(None).unwrap();
        adv.next(Some(0)).unwrap();
        assert!(matches!(adv.next(Some(1)).unwrap(), SourceStep::Stop(_)));
        assert!(matches!(adv.next(Some(0)), Err(AdversaryError::AfterStop)));
    }

    #[test]
    fn rejects_single_agent() {
        assert!(ZeroRatioAdversary::new(1).is_err());
    }
}
