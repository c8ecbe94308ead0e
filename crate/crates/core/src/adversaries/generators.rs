//! Static hardness instance generators. These are pure functions of their
//! parameters.

use crate::domain::{Instance, ValueVector};

use super::{ones, ones_except, AdversaryError};

/// The two-phase family: `k` all-ones items, then `(n-1)*k` items worth 1
/// to everyone except `i_star`. Its offline optimum is exactly `k` (give
/// the all-ones items to `i_star`, split the rest evenly), which makes the
/// family the standard size-parametrized source for asymptotic sweeps.
pub fn gen_two_phase(n: usize, k: usize, i_star: usize) -> Result<Instance, AdversaryError> {
    if n == 0 {
        return Err(AdversaryError::InvalidParameter {
            name: "n",
            message: "need at least one agent".into(),
        });
    }
    if k == 0 {
        return Err(AdversaryError::InvalidParameter {
            name: "k",
            message: "need k >= 1".into(),
        });
    }
    if i_star >= n {
        return Err(AdversaryError::InvalidParameter {
            name: "i_star",
            message: format!("agent {} outside 1..={n}", i_star + 1),
        });
    }
    let mut items = Vec::with_capacity(n * k);
    items.extend(std::iter::repeat_with(|| ones(n)).take(k));
    items.extend(std::iter::repeat_with(|| ones_except(n, i_star)).take((n - 1) * k));
    Ok(Instance::new(n, items)?)
}

/// The offline optimum the two-phase family certifies.
pub fn two_phase_opt(k: usize) -> f64 {
    k as f64
}

/// The permutation-matching family: n items where item j is worthless to
/// the agents `tau(1)..tau(j-1)` and worth 1 to the rest. The optimum is 1
/// and is achieved only by the assignment item j -> tau(j), so an online
/// algorithm has to guess the hidden permutation prefix by prefix.
pub fn gen_permutation_matching(tau: &[usize]) -> Result<Instance, AdversaryError> {
    let n = tau.len();
    if n == 0 {
        return Err(AdversaryError::InvalidParameter {
            name: "tau",
            message: "empty permutation".into(),
        });
    }
    let mut seen = vec![false; n];
    for &a in tau {
        if a >= n || seen[a] {
            return Err(AdversaryError::InvalidParameter {
                name: "tau",
                message: format!("{tau:?} is not a permutation of 1..={n}"),
            });
        }
        seen[a] = true;
    }
    let mut items = Vec::with_capacity(n);
    for j in 0..n {
        let mut values = vec![1.0; n];
        for &zeroed in &tau[..j] {
            values[zeroed] = 0.0;
        }
        items.push(ValueVector::new(values)?);
    }
    Ok(Instance::new(n, items)?)
}
