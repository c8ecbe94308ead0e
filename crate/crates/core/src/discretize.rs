//! Value discretization for the pass-chain allocator.
//!
//! Values are bucketed by `ind(x) = floor(log_{1-eps} x)`, with `ind(0)`
//! mapped to infinity. An item's type is the agent permutation sorted by
//! value descending together with the (nondecreasing) vector of bucket
//! indices; the pass-chain counters are keyed by prefixes of that type.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::ValueVector;

/// A bucket index: an integer, or infinity for zero-valued entries.
///
/// Stored as an `i64` with `i64::MAX` reserved as the infinity sentinel,
/// which sits far outside the range reachable by `ind` for any finite
/// positive `x` and `eps` in (0,1). Ordering and equality follow the
/// underlying integer, so infinity compares greater than every finite index
/// and equal only to itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExtendedIndex(i64);

impl ExtendedIndex {
    pub const INFINITY: ExtendedIndex = ExtendedIndex(i64::MAX);

    pub fn finite(value: i64) -> Self {
        debug_assert!(value < i64::MAX);
        Self(value)
    }

    pub fn is_infinite(self) -> bool {
        self.0 == i64::MAX
    }

    /// The finite index, or `None` for infinity.
    pub fn value(self) -> Option<i64> {
        if self.is_infinite() {
            None
        } else {
            Some(self.0)
        }
    }
}

impl fmt::Display for ExtendedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Snap width for logarithms that land within float noise of an integer,
/// so exact powers of (1-eps) discretize without off-by-one drift.
const LOG_SNAP: f64 = 1e-9;

/// The bucket index of a value: `floor(log_{1-eps} x)` for `x > 0`, infinity
/// for `x = 0`. Negative indices arise for `x > 1` (instances with a cap
/// above 1).
///
/// The logarithm is computed in log space and snapped to the nearest integer
/// when within `1e-9` of it before flooring.
///
/// Panics if `eps` is outside (0, 1); allocator constructors and the CLI
/// validate `eps` before any call lands here.
pub fn ind(x: f64, eps: f64) -> ExtendedIndex {
    assert!(eps > 0.0 && eps < 1.0, "eps {eps} outside (0,1)");
    assert!(x >= 0.0 && x.is_finite(), "value {x} outside [0, inf)");
    if x == 0.0 {
        return ExtendedIndex::INFINITY;
    }
    let t = x.ln() / (1.0 - eps).ln();
    let nearest = t.round();
    let snapped = if (t - nearest).abs() <= LOG_SNAP {
        nearest
    } else {
        t
    };
    ExtendedIndex::finite(snapped.floor() as i64)
}

/// An item type, or a prefix of one: the value-descending agent permutation
/// `tau` plus the first `k` bucket indices `w_1 <= ... <= w_k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeKey {
    tau: Vec<usize>,
    w_prefix: Vec<ExtendedIndex>,
}

impl TypeKey {
    /// Builds a key, checking that `tau` is a permutation of `0..tau.len()`
    /// and that the prefix is nondecreasing with length in `1..=tau.len()`.
    pub fn new(tau: Vec<usize>, w_prefix: Vec<ExtendedIndex>) -> Self {
        let n = tau.len();
        let mut seen = vec![false; n];
        for &a in &tau {
            assert!(a < n && !seen[a], "tau is not a permutation");
            seen[a] = true;
        }
        assert!(
            !w_prefix.is_empty() && w_prefix.len() <= n,
            "prefix length {} outside 1..={n}",
            w_prefix.len()
        );
        assert!(
            w_prefix.windows(2).all(|p| p[0] <= p[1]),
            "w prefix is not nondecreasing"
        );
        Self { tau, w_prefix }
    }

    pub fn n(&self) -> usize {
        self.tau.len()
    }

    /// The prefix length `k`.
    pub fn k(&self) -> usize {
        self.w_prefix.len()
    }

    pub fn tau(&self) -> &[usize] {
        &self.tau
    }

    /// The agent at (1-based) rank `i` of the permutation.
    pub fn agent_at_rank(&self, i: usize) -> usize {
        self.tau[i - 1]
    }

    pub fn w_prefix(&self) -> &[ExtendedIndex] {
        &self.w_prefix
    }

    /// The key truncated to a `k`-long prefix of this key's `w`.
    pub fn prefix(&self, k: usize) -> TypeKey {
        assert!(k >= 1 && k <= self.w_prefix.len());
        TypeKey {
            tau: self.tau.clone(),
            w_prefix: self.w_prefix[..k].to_vec(),
        }
    }
}

impl fmt::Display for TypeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tau: Vec<String> = self.tau.iter().map(|a| (a + 1).to_string()).collect();
        let w: Vec<String> = self.w_prefix.iter().map(|w| w.to_string()).collect();
        write!(f, "({}; {})", tau.join(","), w.join(","))
    }
}

/// The full-length type of an item: agents sorted by value descending (ties
/// by ascending agent index), with `w[i] = ind(v[tau[i]], eps)`. Since `ind`
/// is nonincreasing in the value, `w` comes out nondecreasing.
pub fn item_type(v: &ValueVector, eps: f64) -> TypeKey {
    let mut tau: Vec<usize> = (0..v.n()).collect();
    tau.sort_by(|&a, &b| match v.get(b).total_cmp(&v.get(a)) {
        Ordering::Equal => a.cmp(&b),
        ord => ord,
    });
    let w = tau.iter().map(|&a| ind(v.get(a), eps)).collect();
    TypeKey::new(tau, w)
}
