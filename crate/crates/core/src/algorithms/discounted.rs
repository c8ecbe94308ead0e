//! The exponential-discounting allocator for i.i.d. arrivals.
//!
//! Each item goes to the agent maximizing `(1-eps)^{u_i} * v_i`, so agents
//! with low accumulated utility get priority. Scores are kept in log space,
//! `u_i * ln(1-eps) + ln(v_i)`, which survives utilities in the thousands
//! where the direct power would underflow.

use crate::domain::ValueVector;

use super::{check_dimension, AllocatorError, Decision, OnlineAllocator};

pub struct Discounted {
    utilities: Vec<f64>,
    epsilon: f64,
    ln_base: f64,
}

impl Discounted {
    pub fn new(n: usize, epsilon: f64) -> Result<Self, AllocatorError> {
        assert!(n >= 1);
        if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
            return Err(AllocatorError::InvalidEpsilon(epsilon));
        }
        Ok(Self {
            utilities: vec![0.0; n],
            epsilon,
            ln_base: (1.0 - epsilon).ln(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Log-space score of one agent for one value.
    fn score(&self, agent: usize, value: f64) -> f64 {
        if value == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.utilities[agent] * self.ln_base + value.ln()
        }
    }
}

impl OnlineAllocator for Discounted {
    fn n(&self) -> usize {
        self.utilities.len()
    }

    fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    fn name(&self) -> String {
        format!("discounted(eps={})", self.epsilon)
    }

    fn step(&mut self, item: &ValueVector) -> Result<Decision, AllocatorError> {
        check_dimension(self.n(), item)?;
        let scores: Vec<f64> = (0..self.n())
            .map(|agent| self.score(agent, item.get(agent)))
            .collect();
        // Argmax; exact score ties (including the all-zero item, where every
        // score is -inf) go to the lowest current utility, then the lowest
        // index.
        let mut agent = 0;
        for i in 1..self.n() {
            if scores[i] > scores[agent]
                || (scores[i] == scores[agent] && self.utilities[i] < self.utilities[agent])
            {
                agent = i;
            }
        }
        self.utilities[agent] += item.get(agent);
        Ok(Decision { agent, scores })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::vv;

    #[test]
    fn first_arrival_is_plain_argmax() {
        let mut alloc = Discounted::new(3, 0.2).unwrap();
        assert_eq!(alloc.step(&vv(&[0.4, 0.9, 0.1])).unwrap().agent, 1);
    }

    #[test]
    fn worked_three_step_trace_at_eps_0_6() {
        // Direct-space scores: (1, 0.5) -> agent 1; (0.4, 0.5) -> agent 2;
        // (0.4, 0.5 * 0.4^0.5 ~ 0.316) -> agent 1.
        let mut alloc = Discounted::new(2, 0.6).unwrap();
        let item = vv(&[1.0, 0.5]);
        assert_eq!(alloc.step(&item).unwrap().agent, 0);
        assert_eq!(alloc.step(&item).unwrap().agent, 1);
        assert_eq!(alloc.step(&item).unwrap().agent, 0);
    }

    #[test]
    fn all_zero_item_goes_to_poorest_agent() {
        let mut alloc = Discounted::new(2, 0.1).unwrap();
        alloc.step(&vv(&[1.0, 0.2])).unwrap();
        let d = alloc.step(&vv(&[0.0, 0.0])).unwrap();
        assert_eq!(d.agent, 1);
        assert!(d.scores.iter().all(|s| s.is_infinite() && *s < 0.0));
    }

    #[test]
    fn selected_score_dominates_within_tolerance() {
        let mut alloc = Discounted::new(3, 0.3).unwrap();
        let items = [
            vv(&[0.9, 0.5, 0.1]),
            vv(&[0.2, 0.8, 0.7]),
            vv(&[0.6, 0.6, 0.6]),
            vv(&[0.0, 0.3, 0.9]),
        ];
        for item in items.iter().cycle().take(200) {
            let before = alloc.utilities().to_vec();
            let d = alloc.step(item).unwrap();
            // Independent recomputation of (1-eps)^u * v in direct space.
            let direct: Vec<f64> = (0..3)
                .map(|i| 0.7f64.powf(before[i]) * item.get(i))
                .collect();
            for i in 0..3 {
                assert!(
                    direct[d.agent] >= direct[i] - 1e-12,
                    "picked {} with {direct:?}",
                    d.agent
                );
            }
        }
    }

    #[test]
    fn epsilon_is_validated() {
        assert!(matches!(
            Discounted::new(2, 1.2),
            Err(AllocatorError::InvalidEpsilon(_))
        ));
        assert!(Discounted::new(2, 0.0).is_err());
    }
}
