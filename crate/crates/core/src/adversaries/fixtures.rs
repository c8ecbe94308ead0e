//! Small named instances used across tests, docs, and the CLI.

use crate::domain::{Instance, ValueVector};

/// Epsilon under which [`pass_chain_showcase`] reproduces its pinned
/// ownership: bucket k holds exactly (1/2)^k.
pub const PASS_CHAIN_SHOWCASE_EPS: f64 = 0.5;

/// Ownership the pass-chain allocator produces on
/// [`pass_chain_showcase`] at [`PASS_CHAIN_SHOWCASE_EPS`].
pub const PASS_CHAIN_SHOWCASE_OWNERS: [usize; 6] = [0, 0, 1, 2, 0, 0];

fn vv(values: &[f64]) -> ValueVector {
    ValueVector::new(values.to_vec()).expect("fixture values")
}

/// The two-agent snack sequence from the motivating example: picking by
/// higher value starves Bob, alternating wastes Alice's big items.
pub fn snack_instance() -> Instance {
    let alice = [0.7, 1.0, 0.8, 0.9, 0.7, 0.8];
    let bob = [0.5, 0.1, 0.7, 0.2, 0.6, 0.0];
    let items = alice
        .iter()
        .zip(bob.iter())
        .map(|(&a, &b)| vv(&[a, b]))
        .collect();
    Instance::new(2, items).expect("snack fixture")
}

/// A six-item, three-agent sequence whose bucket patterns alternate the
/// second-place agent; the pass-chain allocator balances it as pinned in
/// [`PASS_CHAIN_SHOWCASE_OWNERS`] while per-type round-robin would dump
/// everything on agent 1.
pub fn pass_chain_showcase() -> Instance {
    let items = vec![
        vv(&[1.0, 0.5, 0.25]),
        vv(&[1.0, 0.25, 0.5]),
        vv(&[1.0, 0.5, 0.125]),
        vv(&[1.0, 0.125, 0.5]),
        vv(&[1.0, 0.5, 0.0625]),
        vv(&[1.0, 0.0625, 0.5]),
    ];
    Instance::new(3, items).expect("showcase fixture")
}
