//! Property tests for the crate-wide invariants: bucketing arithmetic,
//! partition bookkeeping, oracle soundness, and scale invariance.

use proptest::prelude::*;

use maxmin_online::algorithms::{
    AllocatorFactory, AllocatorSpec, Discounted, Greedy, OnlineAllocator, Phi, RoundRobin,
};
use maxmin_online::discretize::{ind, item_type};
use maxmin_online::domain::{Instance, ValueVector};
use maxmin_online::oracle::{audit_upper_bound, opt_brute_force, opt_exact, DEFAULT_NODE_BUDGET};

fn vv(values: Vec<f64>) -> ValueVector {
    ValueVector::new(values).unwrap()
}

fn small_instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (2..=max_n, 0..=max_m).prop_flat_map(|(n, m)| {
        proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, n), m)
            .prop_map(move |rows| Instance::new(n, rows.into_iter().map(vv).collect()).unwrap())
    })
}

proptest! {
    #[test]
    fn ind_is_monotone_nonincreasing(
        x in 1e-9f64..2.0,
        y in 1e-9f64..2.0,
        eps in 0.01f64..0.99,
    ) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        prop_assert!(ind(lo, eps) >= ind(hi, eps));
    }

    #[test]
    fn ind_sandwich(x in 1e-9f64..2.0, eps in 0.01f64..0.95) {
        let idx = ind(x, eps).value().expect("positive input");
        let base = 1.0 - eps;
        let upper = base.powi(idx as i32);
        let lower = base.powi(idx as i32 + 1);
        // Strictness at the boundaries softened by relative float slack.
        prop_assert!(x <= upper * (1.0 + 1e-12), "x={x} upper={upper}");
        prop_assert!(lower < x * (1.0 + 1e-12), "x={x} lower={lower}");
    }

    #[test]
    fn item_type_is_deterministic_and_sorted(
        values in proptest::collection::vec(0.0f64..1.0, 1..6),
        eps in 0.01f64..0.99,
    ) {
        let item = vv(values);
        let a = item_type(&item, eps);
        let b = item_type(&item, eps);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.w_prefix().windows(2).all(|w| w[0] <= w[1]));
        // tau sorts values descending with index tie-break.
        for ranks in a.tau().windows(2) {
            let (hi, lo) = (item.get(ranks[0]), item.get(ranks[1]));
            prop_assert!(hi > lo || (hi == lo && ranks[0] < ranks[1]));
        }
    }

    /// After any prefix of arrivals, re-deriving utilities from ownership
    /// matches the allocator's running utilities.
    #[test]
    fn partition_holds_after_every_prefix(inst in small_instance(4, 25), seed in any::<u64>()) {
        let specs = [
            AllocatorSpec::Random,
            AllocatorSpec::RoundRobin,
            AllocatorSpec::Greedy { phi: Phi::Sqrt },
            AllocatorSpec::PassChain { epsilon: 0.3 },
            AllocatorSpec::Discounted { epsilon: 0.2 },
        ];
        for spec in &specs {
            let mut alloc = spec.build(inst.n(), seed).unwrap();
            let mut derived = vec![0.0f64; inst.n()];
            for item in inst.items() {
                let d = alloc.step(item).unwrap();
                prop_assert!(d.agent < inst.n());
                derived[d.agent] += item.get(d.agent);
                for (a, (&x, &y)) in alloc.utilities().iter().zip(derived.iter()).enumerate() {
                    prop_assert!((x - y).abs() <= 1e-9, "{} agent {a}: {x} vs {y}", spec.id());
                }
            }
        }
    }

    /// Branch and bound equals exhaustive enumeration, and the pruning
    /// bound dominates every completion (checked by the full-tree audit).
    #[test]
    fn oracle_equals_enumeration(inst in small_instance(3, 7)) {
        let bb = opt_exact(&inst, DEFAULT_NODE_BUDGET).unwrap();
        let brute = opt_brute_force(&inst).unwrap();
        prop_assert!(bb.exact);
        prop_assert_eq!(bb.opt_value, brute.opt_value);
        let audited = audit_upper_bound(&inst).unwrap();
        prop_assert_eq!(audited, brute.opt_value);
    }

    /// Appending one item never decreases the offline optimum.
    #[test]
    fn oracle_is_monotone_in_items(
        inst in small_instance(3, 6),
        extra in proptest::collection::vec(0.0f64..1.0, 3),
    ) {
        let before = opt_exact(&inst, DEFAULT_NODE_BUDGET).unwrap();
        let mut items = inst.items().to_vec();
        items.push(vv(extra[..inst.n()].to_vec()));
        let bigger = Instance::new(inst.n(), items).unwrap();
        let after = opt_exact(&bigger, DEFAULT_NODE_BUDGET).unwrap();
        prop_assert!(after.opt_value >= before.opt_value - 1e-12);
    }

    /// Scaling all values by c > 0 leaves the decision sequences of
    /// round-robin, greedy(identity), and the discounted allocator (with
    /// the discount base changed to (1-eps)^(1/c) on the scaled side, i.e.
    /// original eps-hat with (1 - eps_hat) = (1 - eps)^c) unchanged.
    #[test]
    fn scaling_leaves_decisions_unchanged(
        rows in proptest::collection::vec(proptest::collection::vec(0.001f64..1.0, 3), 1..30),
        c in 0.2f64..5.0,
        eps in 0.05f64..0.9,
    ) {
        let items: Vec<ValueVector> = rows.iter().cloned().map(vv).collect();
        let scaled: Vec<ValueVector> = items.iter().map(|i| i.scaled(c).unwrap()).collect();

        let drive = |alloc: &mut dyn OnlineAllocator, items: &[ValueVector]| -> Vec<usize> {
            items.iter().map(|i| alloc.step(i).unwrap().agent).collect()
        };

        let mut rr_a = RoundRobin::new(3);
        let mut rr_b = RoundRobin::new(3);
        prop_assert_eq!(drive(&mut rr_a, &items), drive(&mut rr_b, &scaled));

        let mut gr_a = Greedy::new(3, Phi::Identity).unwrap();
        let mut gr_b = Greedy::new(3, Phi::Identity).unwrap();
        prop_assert_eq!(drive(&mut gr_a, &items), drive(&mut gr_b, &scaled));

        // Original run uses eps_hat with (1 - eps_hat) = (1 - eps)^c; the
        // scaled run uses eps.
        let eps_hat = 1.0 - (1.0 - eps).powf(c);
        let mut disc_a = Discounted::new(3, eps_hat).unwrap();
        let mut disc_b = Discounted::new(3, eps).unwrap();
        prop_assert_eq!(drive(&mut disc_a, &items), drive(&mut disc_b, &scaled));
    }
}
