//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Thresholds and tolerances are pinned here, not computed at run time.
//! The guarantee-backed checks (1, 2, 3, 4, 6) tolerate zero failures;
//! the Monte-Carlo checks use fixed seeds and pre-sized trial counts so
//! their confidence intervals sit well inside the stated tolerances.

use std::sync::OnceLock;

use maxmin_online::adversaries::greedy_killer::greedy_ratio_ceiling;
use maxmin_online::adversaries::sampler::{IIDSampler, SamplerKind};
use maxmin_online::adversaries::StopReason;
use maxmin_online::algorithms::{AllocatorFactory, AllocatorSpec, Phi};
use maxmin_online::domain::{Instance, ValueVector};
use maxmin_online::harness::report::{write_summary_json, write_sweep_csv, write_trials_csv};
use maxmin_online::harness::seeds::split_seed;
use maxmin_online::harness::verify::{fuzz_pass_chain, FuzzConfig, FuzzReport};
use maxmin_online::harness::{
    asymptotic_sweep, monte_carlo_iid, parallel, run_trial, run_trials,
    standard_deterministic_suite, standard_suite, OracleMode, SourceFamily, SourceSpec,
    TrialOptions,
};
use maxmin_online::oracle::{audit_upper_bound, opt_brute_force, opt_exact, DEFAULT_NODE_BUDGET};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MASTER_SEED: u64 = 0x4D41_584D_494E;
const WORKERS: usize = 8;

/// Theorem-4 growth: OPT(sigma) / c^(3-r) stays below this constant across
/// all runs of criterion 6. Pinned once from the shipped configuration; a
/// super-polynomial regression in the adversary would blow through it.
const DEFICIENCY_GROWTH_CONSTANT: f64 = 32.0;

fn pass(name: &str, detail: String) {
    println!("[PASS] {name}: {detail}");
}

/// Criteria 1 and 2 share one fuzz corpus.
fn shared_fuzz_report() -> &'static FuzzReport {
    static REPORT: OnceLock<FuzzReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let cfg = FuzzConfig {
            sequences: 1_000,
            max_m: 2_000,
            agent_counts: vec![2, 3],
            epsilons: vec![0.1, 0.25, 0.5],
            master_seed: split_seed(MASTER_SEED, 1),
            workers: WORKERS,
        };
        fuzz_pass_chain(&cfg).expect("fuzz corpus runs")
    })
}

#[test]
fn criterion_01_pass_chain_utility_floor_on_fuzz_corpus() {
    let report = shared_fuzz_report();
    assert_eq!(report.floor_failures, 0, "floor violations: {report:?}");
    assert!(report.min_slack >= -1e-6, "min slack {}", report.min_slack);
    pass(
        "criterion 1 (per-agent utility floor, 1000 fuzzed sequences)",
        format!(
            "0 failures over {} items; tightest slack {:.3}",
            report.total_items, report.min_slack
        ),
    );
}

#[test]
fn criterion_02_pass_chain_bucket_counts_on_fuzz_corpus() {
    let report = shared_fuzz_report();
    assert_eq!(report.bucket_violations, 0, "bucket violations: {report:?}");
    pass(
        "criterion 2 (per-type chance-count floor, same corpus)",
        format!(
            "0 violations over {} per-arrival bucket checks",
            report.bucket_checks
        ),
    );
}

#[test]
fn criterion_03_oracle_equals_enumeration_with_admissible_bounds() {
    let outcomes = parallel::run_indexed(200, WORKERS, |idx| {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(MASTER_SEED, 300 + idx as u64));
        let n = [2usize, 3][idx % 2];
        let m = rng.gen_range(0..=12);
        let items: Vec<ValueVector> = (0..m)
            .map(|_| ValueVector::new((0..n).map(|_| rng.gen::<f64>()).collect()).unwrap())
            .collect();
        let inst = Instance::new(n, items).unwrap();
        let bb = opt_exact(&inst, DEFAULT_NODE_BUDGET).unwrap();
        let brute = opt_brute_force(&inst).unwrap();
        // The audit asserts bound admissibility at every node internally.
        let audited = audit_upper_bound(&inst).unwrap();
        assert!(bb.exact, "instance {idx} blew the node budget");
        assert_eq!(bb.opt_value, brute.opt_value, "instance {idx}");
        assert_eq!(audited, brute.opt_value, "instance {idx}");
        bb.nodes_explored
    });
    let total_nodes: u64 = outcomes.iter().sum();
    pass(
        "criterion 3 (oracle equals enumeration on 200 instances)",
        format!("exact equality everywhere; {total_nodes} search nodes audited for admissibility"),
    );
}

#[test]
fn criterion_04_zero_ratio_adversary_zeroes_every_deterministic_allocator() {
    let mut runs = 0;
    for n in [2usize, 3] {
        for spec in standard_deterministic_suite() {
            let out = run_trial(
                "0",
                &spec,
                &SourceSpec::ZeroRatio { n },
                split_seed(MASTER_SEED, 400 + n as u64),
                &TrialOptions {
                    oracle: OracleMode::SolveOnly { budget: 1 << 16 },
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(out.record.alg_welfare, 0.0, "{} at n={n}", spec.id());
            assert_eq!(out.record.opt, Some(1.0), "{} at n={n}", spec.id());
            assert_eq!(out.record.opt_exact, Some(true));
            runs += 1;
        }
    }
    pass(
        "criterion 4 (adaptive zeroing of deterministic allocators)",
        format!("{runs} runs ended at welfare 0 with oracle optimum exactly 1"),
    );
}

#[test]
fn criterion_05_random_wins_the_hidden_pair_a_quarter_of_the_time() {
    let source = SourceSpec::Permutation { tau: vec![1, 0] };
    let trials = 100_000usize;
    let outcomes = run_trials(
        &AllocatorSpec::Random,
        &source,
        trials,
        split_seed(MASTER_SEED, 5),
        &TrialOptions::default(),
        WORKERS,
    )
    .unwrap();
    let wins = outcomes
        .iter()
        .filter(|o| (o.record.alg_welfare - 1.0).abs() < 1e-9)
        .count();
    let freq = wins as f64 / trials as f64;
    assert!((freq - 0.25).abs() <= 0.01, "success frequency {freq}");
    pass(
        "criterion 5 (uniform allocation on the two-agent hidden pair)",
        format!("success frequency {freq:.4} within 0.25 +/- 0.01 (ceiling 1/2! = 0.5)"),
    );
}

#[test]
fn criterion_06_deficiency_adversary_reproduces_the_shortfall_bound() {
    let allocators = [
        AllocatorSpec::RoundRobin,
        AllocatorSpec::Greedy { phi: Phi::Identity },
    ];
    let r = 0.75;
    let mut max_growth: f64 = 0.0;
    let mut lines = Vec::new();
    for spec in &allocators {
        for c in [1.0f64, 2.0, 4.0, 8.0] {
            let source = SourceSpec::Deficiency {
                n: 2,
                r,
                c,
                round_cap: None,
            };
            let out = run_trial(
                "0",
                spec,
                &source,
                split_seed(MASTER_SEED, 600 + c as u64),
                &TrialOptions {
                    oracle: OracleMode::CertifiedOnly,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(
                out.record.stop_reason,
                StopReason::Exhausted,
                "{} c={c}: hit the round cap before the break condition",
                spec.id()
            );
            let opt = out.record.opt.expect("break certifies the optimum");
            assert!(
                out.record.alg_welfare <= opt / 2.0 - c + 1e-6,
                "{} c={c}: welfare {} vs bound {}",
                spec.id(),
                out.record.alg_welfare,
                opt / 2.0 - c
            );
            let growth = opt / c.powf(3.0 - r);
            max_growth = max_growth.max(growth);
            lines.push(format!(
                "{} c={c}: OPT {opt:.2}, OPT/c^2.25 {growth:.2}",
                spec.id()
            ));
        }
    }
    assert!(
        max_growth <= DEFICIENCY_GROWTH_CONSTANT,
        "growth constant {max_growth} exceeds pinned {DEFICIENCY_GROWTH_CONSTANT}"
    );
    pass(
        "criterion 6 (deficiency adversary: ALG <= OPT/2 - c, OPT = O(c^2.25))",
        format!(
            "max OPT/c^2.25 = {max_growth:.2} <= {DEFICIENCY_GROWTH_CONSTANT}; {}",
            lines.join("; ")
        ),
    );
}

#[test]
fn criterion_07_discounting_beats_round_robin_on_the_constant_distribution() {
    let m = 10_000usize;
    let eps = 0.1;
    let n = 2.0f64;
    // Precondition of the guarantee: the expected optimum m/3 clears
    // (2/eps^2) * ln(n/eps).
    let expected_opt = m as f64 / 3.0;
    let needed = 2.0 / (eps * eps) * (n / eps).ln();
    assert!(
        expected_opt >= needed,
        "precondition: {expected_opt} < {needed}"
    );

    let source = SourceSpec::IidConstant {
        values: vec![1.0, 0.5],
        m,
    };
    let discounted = monte_carlo_iid(
        &AllocatorSpec::Discounted { epsilon: eps },
        &source,
        100,
        split_seed(MASTER_SEED, 7),
        None,
        WORKERS,
    )
    .unwrap();
    let target = (1.0 - 2.0 * eps) * (m as f64 / 3.0);
    assert!(
        discounted.mean_alg >= target,
        "mean welfare {} below (1-2eps)m/3 = {target}",
        discounted.mean_alg
    );

    let round_robin = monte_carlo_iid(
        &AllocatorSpec::RoundRobin,
        &source,
        1,
        split_seed(MASTER_SEED, 8),
        None,
        WORKERS,
    )
    .unwrap();
    assert_eq!(
        round_robin.mean_alg,
        m as f64 / 4.0,
        "round robin is exactly m/4 here"
    );
    assert!(discounted.mean_alg > round_robin.mean_alg);
    pass(
        "criterion 7 (discounted allocator on the constant (1, 1/2) stream)",
        format!(
            "mean welfare {:.1} >= {target:.1}, round robin {:.1}; precondition {expected_opt:.0} >= {needed:.0}",
            discounted.mean_alg, round_robin.mean_alg
        ),
    );
}

#[test]
fn criterion_08_greedy_killer_caps_greedy_ratios() {
    let ceiling = greedy_ratio_ceiling();
    let mut lines = Vec::new();
    for phi in [Phi::Identity, Phi::Sqrt] {
        let spec = AllocatorSpec::Greedy { phi };
        let series = asymptotic_sweep(
            &spec,
            &SourceFamily::GreedyKiller,
            &[10, 20, 40],
            1,
            split_seed(MASTER_SEED, 9),
            DEFAULT_NODE_BUDGET,
            WORKERS,
        )
        .unwrap();
        let ratios: Vec<f64> = series.points.iter().map(|p| p.mean_ratio).collect();
        assert!(
            ratios.windows(2).all(|w| w[1] <= w[0] + 1e-12),
            "{}: ratios not nonincreasing along the sweep: {ratios:?}",
            spec.id()
        );
        let last = *ratios.last().unwrap();
        assert!(
            last <= ceiling + 0.03,
            "{}: ratio {last} at eps=1/40 above {:.4}",
            spec.id(),
            ceiling + 0.03
        );
        lines.push(format!("{}: ratios {ratios:?}", spec.id()));
    }
    pass(
        "criterion 8 (greedy-type ceiling (3-sqrt5)/2 at desk scale)",
        format!("ceiling {:.4}+0.03; {}", ceiling, lines.join("; ")),
    );
}

#[test]
fn criterion_09_random_tracks_the_proportional_share_on_two_phase() {
    let trials = 200;
    let mut lines = Vec::new();
    for n in [2usize, 3] {
        for k in [1_000usize, 10_000] {
            let source = SourceSpec::TwoPhase {
                n,
                k,
                i_star: n - 1,
            };
            let outcomes = run_trials(
                &AllocatorSpec::Random,
                &source,
                trials,
                split_seed(MASTER_SEED, (10 + n + k) as u64),
                &TrialOptions::default(),
                WORKERS,
            )
            .unwrap();
            let mean: f64 =
                outcomes.iter().map(|o| o.record.alg_welfare).sum::<f64>() / trials as f64;
            let kf = k as f64;
            let floor = kf / n as f64 - 4.0 * (kf * kf.ln()).sqrt();
            assert!(
                mean >= floor,
                "n={n} k={k}: mean {mean} below floor {floor}"
            );
            let deficit = kf / n as f64 - mean;
            lines.push(format!(
                "n={n} k={k}: deficit {deficit:.1} (allowed {:.1})",
                kf / n as f64 - floor
            ));
        }
    }
    pass(
        "criterion 9 (uniform allocation trend on the two-phase family)",
        lines.join("; "),
    );
}

#[test]
fn criterion_10_matching_distribution_caps_every_allocator() {
    let suite = standard_suite();
    let mut lines = Vec::new();
    for n in [2usize, 4] {
        let trials = 100_000usize;
        let ceiling = (6.0f64 / 7.0).powi(n as i32 / 2);
        // Per trial: did the optimum equal 1, and which allocators placed
        // every item right.
        let per_trial = parallel::run_indexed(trials, WORKERS, |t| {
            let seed = split_seed(MASTER_SEED, (n as u64) << 32 | t as u64);
            let mut sampler =
                IIDSampler::new(SamplerKind::Matching { n }, split_seed(seed, 0)).unwrap();
            let items: Vec<ValueVector> = (0..n).map(|_| sampler.draw()).collect();
            let inst = Instance::new(n, items).unwrap();
            let opt = opt_exact(&inst, 1 << 16).unwrap();
            let opt_is_one = (opt.opt_value - 1.0).abs() < 1e-9;
            let mut successes = vec![false; suite.len()];
            if opt_is_one {
                for (a, spec) in suite.iter().enumerate() {
                    let mut alloc = spec.build(n, split_seed(seed, 2 + a as u64)).unwrap();
                    for item in inst.items() {
                        alloc.step(item).unwrap();
                    }
                    let welfare = alloc
                        .utilities()
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min);
                    successes[a] = welfare >= 1.0 - 1e-9;
                }
            }
            (opt_is_one, successes)
        });
        let conditioned = per_trial.iter().filter(|(one, _)| *one).count();
        assert!(
            conditioned > 1_000,
            "degenerate conditioning: {conditioned}"
        );
        let sigma = (ceiling * (1.0 - ceiling) / conditioned as f64).sqrt();
        for (a, spec) in suite.iter().enumerate() {
            let wins = per_trial.iter().filter(|(one, s)| *one && s[a]).count();
            let rate = wins as f64 / conditioned as f64;
            assert!(
                rate <= ceiling + 3.0 * sigma,
                "{} at n={n}: conditional success {rate} above {ceiling} + 3 sigma",
                spec.id()
            );
        }
        let best = suite
            .iter()
            .enumerate()
            .map(|(a, spec)| {
                let wins = per_trial.iter().filter(|(one, s)| *one && s[a]).count();
                (spec.id(), wins as f64 / conditioned as f64)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        lines.push(format!(
            "n={n}: ceiling {ceiling:.3}+3s, {conditioned} conditioned trials, best {} at {:.3}",
            best.0, best.1
        ));
    }
    pass(
        "criterion 10 (known-i.i.d. matching ceiling)",
        lines.join("; "),
    );
}

#[test]
fn criterion_11_reports_are_byte_identical_across_worker_counts() {
    fn experiment_bundle(workers: usize) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let seed = split_seed(MASTER_SEED, 11);
        let records: Vec<_> = run_trials(
            &AllocatorSpec::Random,
            &SourceSpec::IidUniform { n: 3, m: 50 },
            64,
            seed,
            &TrialOptions {
                oracle: OracleMode::Skip,
                ..Default::default()
            },
            workers,
        )
        .unwrap()
        .into_iter()
        .map(|o| o.record)
        .collect();
        let mut trials_csv = Vec::new();
        write_trials_csv(&mut trials_csv, &records).unwrap();

        let series = asymptotic_sweep(
            &AllocatorSpec::Random,
            &SourceFamily::TwoPhase { n: 2, i_star: 1 },
            &[10, 50],
            16,
            seed,
            DEFAULT_NODE_BUDGET,
            workers,
        )
        .unwrap();
        let mut sweep_csv = Vec::new();
        write_sweep_csv(&mut sweep_csv, &series).unwrap();

        let estimate = monte_carlo_iid(
            &AllocatorSpec::Random,
            &SourceSpec::IidUniform { n: 2, m: 8 },
            32,
            seed,
            Some(DEFAULT_NODE_BUDGET),
            workers,
        )
        .unwrap();
        let mut summary_json = Vec::new();
        write_summary_json(&mut summary_json, &estimate).unwrap();
        (trials_csv, sweep_csv, summary_json)
    }

    let single = experiment_bundle(1);
    let pooled = experiment_bundle(4);
    assert_eq!(single.0, pooled.0, "trial CSV differs across worker counts");
    assert_eq!(single.1, pooled.1, "sweep CSV differs across worker counts");
    assert_eq!(
        single.2, pooled.2,
        "summary JSON differs across worker counts"
    );
    pass(
        "criterion 11 (reproducibility across worker counts)",
        format!(
            "{} bytes of CSV/JSON identical between 1 and 4 workers",
            single.0.len() + single.1.len() + single.2.len()
        ),
    );
}
