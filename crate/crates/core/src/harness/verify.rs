//! Guarantee verifiers.
//!
//! Two families of check live here:
//!
//! - the per-agent utility floor of the pass-chain allocator,
//!   `v_i(A_i) >= (1-eps)/n * v_i(M) - (n!)^2 / eps^n`, and its per-type
//!   counting form: after every arrival and for every touched type prefix,
//!   the designated agent owns at least a 1/n fraction of that bucket minus
//!   one item. Both are theorems for this allocator, so any failure is an
//!   implementation bug, and the checkers recount buckets from scratch
//!   rather than trusting the allocator's internal counters;
//! - ratio sanity: no online run may beat an exact offline optimum.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algorithms::{AllocatorFactory, OnlineAllocator, PassChain};
use crate::discretize::item_type;
use crate::domain::{Instance, ValueVector};

use super::seeds::split_seed;
use super::{parallel, standard_suite, HarnessError, OracleMode, SourceSpec, TrialOptions};

/// Float slack on the utility-floor comparison.
pub const BOUND_SLACK: f64 = 1e-6;

/// The additive term of the pass-chain guarantee, (n!)^2 / eps^n.
pub fn pass_chain_additive_term(n: usize, eps: f64) -> f64 {
    let factorial: f64 = (1..=n as u64).map(|x| x as f64).product();
    factorial * factorial / eps.powi(n as i32)
}

/// Per-agent view of the utility floor.
#[derive(Debug, Clone, Serialize)]
pub struct AgentFloor {
    pub agent: usize,
    pub utility: f64,
    pub total_value: f64,
    /// (1-eps)/n * v_i(M) - (n!)^2 / eps^n.
    pub floor: f64,
    /// utility - floor; negative means a violation.
    pub slack: f64,
}

/// Outcome of verifying one pass-chain trace.
#[derive(Debug, Clone, Serialize)]
pub struct PassChainVerification {
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub agents: Vec<AgentFloor>,
    pub min_slack: f64,
    /// Bucket inequalities evaluated (one per touched prefix per arrival).
    pub bucket_checks: u64,
    /// Bucket inequality violations; zero for a correct implementation.
    pub bucket_violations: u64,
    pub pass: bool,
}

#[derive(Default)]
struct BucketTally {
    total: u64,
    owned_by_rank_agent: u64,
}

/// Verifies a pass-chain trace: replays the allocator on `items`, errors if
/// the replayed decisions disagree with `owners` (trace/eps mismatch), and
/// checks both guarantee forms along the way.
pub fn verify_theorem3(
    inst: &Instance,
    owners: &[usize],
    epsilon: f64,
) -> Result<PassChainVerification, HarnessError> {
    let n = inst.n();
    if owners.len() != inst.m() {
        return Err(HarnessError::TraceLength {
            expected: inst.m(),
            got: owners.len(),
        });
    }
    let mut replay = PassChain::new(n, epsilon)?;
    let mut tallies: BTreeMap<(crate::discretize::TypeKey, usize), BucketTally> = BTreeMap::new();
    let mut bucket_checks = 0u64;
    let mut bucket_violations = 0u64;

    for (j, item) in inst.items().iter().enumerate() {
        let decision = replay.step(item)?;
        let recorded = owners[j];
        if recorded != decision.agent {
            return Err(HarnessError::TraceMismatch {
                item: j,
                expected: decision.agent,
                got: recorded,
            });
        }
        // Bucket bookkeeping, recomputed from the item itself.
        let full = item_type(item, epsilon);
        for k in 1..=n {
            let key = (full.prefix(k), k);
            let rank_agent = full.agent_at_rank(k);
            let tally = tallies.entry(key).or_default();
            tally.total += 1;
            if decision.agent == rank_agent {
                tally.owned_by_rank_agent += 1;
            }
            // |A_{tau(k)} cap E| >= |E|/n - 1, in exact integers:
            // n * owned >= total - n.
            bucket_checks += 1;
            if (n as u64) * tally.owned_by_rank_agent + (n as u64) < tally.total {
                bucket_violations += 1;
            }
        }
    }

    let additive = pass_chain_additive_term(n, epsilon);
    let mut agents = Vec::with_capacity(n);
    let mut min_slack = f64::INFINITY;
    for (agent, &utility) in replay.utilities().iter().enumerate() {
        let total_value = inst.total_value(agent);
        let floor = (1.0 - epsilon) / n as f64 * total_value - additive;
        let slack = utility - floor;
        min_slack = min_slack.min(slack);
        agents.push(AgentFloor {
            agent,
            utility,
            total_value,
            floor,
            slack,
        });
    }
    let pass = min_slack >= -BOUND_SLACK && bucket_violations == 0;
    Ok(PassChainVerification {
        n,
        m: inst.m(),
        epsilon,
        agents,
        min_slack,
        bucket_checks,
        bucket_violations,
        pass,
    })
}

/// Runs the pass-chain allocator on `inst` and verifies the trace it
/// produced.
pub fn run_and_verify_pass_chain(
    inst: &Instance,
    epsilon: f64,
) -> Result<PassChainVerification, HarnessError> {
    let mut alloc = PassChain::new(inst.n(), epsilon)?;
    let owners = inst
        .items()
        .iter()
        .map(|item| alloc.step(item).map(|d| d.agent))
        .collect::<Result<Vec<_>, _>>()?;
    verify_theorem3(inst, &owners, epsilon)
}

/// Configuration of the randomized pass-chain verification corpus.
#[derive(Debug, Clone, Serialize)]
pub struct FuzzConfig {
    pub sequences: usize,
    pub max_m: usize,
    pub agent_counts: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub master_seed: u64,
    pub workers: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            sequences: 200,
            max_m: 2_000,
            agent_counts: vec![2, 3],
            epsilons: vec![0.1, 0.25, 0.5],
            master_seed: 0xFA17,
            workers: 1,
        }
    }
}

/// Aggregate of a fuzz run over random sequences.
#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub sequences: usize,
    pub total_items: u64,
    pub floor_failures: u64,
    pub bucket_checks: u64,
    pub bucket_violations: u64,
    pub min_slack: f64,
    pub pass: bool,
}

/// One random sequence of the corpus: the grid of (n, eps) combinations is
/// cycled deterministically, sizes and values come from the per-sequence
/// seed.
pub fn fuzz_sequence(cfg: &FuzzConfig, index: usize) -> (Instance, f64) {
    let n = cfg.agent_counts[index % cfg.agent_counts.len()];
    let eps = cfg.epsilons[(index / cfg.agent_counts.len()) % cfg.epsilons.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(cfg.master_seed, index as u64));
    let m = rng.gen_range(1..=cfg.max_m);
    let items = (0..m)
        .map(|_| ValueVector::new((0..n).map(|_| rng.gen::<f64>()).collect()).expect("uniform"))
        .collect();
    (Instance::new(n, items).expect("fuzz instance"), eps)
}

/// Runs the whole corpus and aggregates. Zero failures is the passing bar.
pub fn fuzz_pass_chain(cfg: &FuzzConfig) -> Result<FuzzReport, HarnessError> {
    if cfg.sequences == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let verifications = parallel::run_indexed(cfg.sequences, cfg.workers, |idx| {
        let (inst, eps) = fuzz_sequence(cfg, idx);
        run_and_verify_pass_chain(&inst, eps)
    });
    let mut report = FuzzReport {
        sequences: cfg.sequences,
        total_items: 0,
        floor_failures: 0,
        bucket_checks: 0,
        bucket_violations: 0,
        min_slack: f64::INFINITY,
        pass: true,
    };
    for v in verifications {
        let v = v?;
        report.total_items += v.m as u64;
        if v.min_slack < -BOUND_SLACK {
            report.floor_failures += 1;
        }
        report.bucket_checks += v.bucket_checks;
        report.bucket_violations += v.bucket_violations;
        report.min_slack = report.min_slack.min(v.min_slack);
    }
    report.pass = report.floor_failures == 0 && report.bucket_violations == 0;
    Ok(report)
}

/// Outcome of the ratio-sanity sweep: every allocator in the standard
/// lineup, on random small instances with an exact oracle, never beats the
/// optimum.
#[derive(Debug, Clone, Serialize)]
pub struct RatioSanityReport {
    pub instances: usize,
    pub trials: u64,
    pub max_ratio_seen: f64,
    pub pass: bool,
}

pub fn ratio_sanity_suite(
    instances: usize,
    master_seed: u64,
    oracle_budget: u64,
    workers: usize,
) -> Result<RatioSanityReport, HarnessError> {
    if instances == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let suite = standard_suite();
    let results = parallel::run_indexed(instances, workers, |idx| {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(master_seed, idx as u64));
        let n = [2usize, 3][idx % 2];
        let m = rng.gen_range(0..=10);
        let items: Vec<ValueVector> = (0..m)
            .map(|_| ValueVector::new((0..n).map(|_| rng.gen::<f64>()).collect()).expect("values"))
            .collect();
        let inst = Instance::new(n, items).expect("sanity instance");
        let source = SourceSpec::Replay { instance: inst };
        let opts = TrialOptions {
            oracle: OracleMode::SolveOnly {
                budget: oracle_budget,
            },
            ..Default::default()
        };
        let mut max_ratio = 0.0f64;
        let mut trials = 0u64;
        for (a, spec) in suite.iter().enumerate() {
            let reps = if spec.deterministic() { 1 } else { 8 };
            for rep in 0..reps {
                // run_trial itself errors out if a ratio passes 1 + 1e-9.
                let seed = split_seed(master_seed, (idx as u64) << 16 | (a as u64) << 8 | rep);
                let out = super::run_trial("sanity", spec, &source, seed, &opts)?;
                if let Some(r) = out.record.ratio {
                    max_ratio = max_ratio.max(r);
                }
                trials += 1;
            }
        }
        Ok::<(f64, u64), HarnessError>((max_ratio, trials))
    });
    let mut max_ratio_seen = 0.0f64;
    let mut trials = 0;
    for r in results {
        let (m, t) = r?;
        max_ratio_seen = max_ratio_seen.max(m);
        trials += t;
    }
    Ok(RatioSanityReport {
        instances,
        trials,
        max_ratio_seen,
        pass: max_ratio_seen <= 1.0 + 1e-9,
    })
}
