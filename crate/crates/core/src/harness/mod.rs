//! The experiment harness: runs allocators against instance sources,
//! estimates strict and asymptotic competitive ratios, and verifies the
//! guarantees that are checkable at desk scale.
//!
//! Trials are independent: each one builds a fresh allocator state and a
//! fresh source from seeds derived by a counter-based split of the master
//! seed, so reports are byte-identical for any worker count.

pub mod parallel;
pub mod report;
pub mod seeds;
pub mod stats;
pub mod verify;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::adversaries::fixtures;
use crate::adversaries::generators::{gen_permutation_matching, gen_two_phase, two_phase_opt};
use crate::adversaries::{
    AdaptiveSource, AdversaryError, AdversarySpec, IIDSampler, SamplerKind, SourceStep, StopReason,
};
use crate::algorithms::{AllocatorError, AllocatorFactory, AllocatorSpec, Phi};
use crate::domain::{
    egalitarian_welfare, Allocation, DomainError, Instance, ValueVector, UTILITY_SLACK,
};
use crate::oracle::{opt_exact, OracleError};
use seeds::split_seed;

#[derive(Debug)]
pub enum HarnessError {
    Allocator(AllocatorError),
    Adversary(AdversaryError),
    Domain(DomainError),
    Oracle(OracleError),
    Io(std::io::Error),
    /// The supplied trace was not produced by the stated allocator.
    TraceMismatch {
        item: usize,
        expected: usize,
        got: usize,
    },
    /// The supplied trace covers a different number of items.
    TraceLength {
        expected: usize,
        got: usize,
    },
    /// Trial counts must be positive.
    ZeroTrials,
    /// Sweep size grids must be strictly increasing.
    SizesNotIncreasing,
    /// The operation needs an exact oracle value and did not get one.
    OptNotExact,
    /// The operation needs a certified or computed optimum.
    OptUnavailable,
    /// An allocator beat an exact offline optimum: an implementation bug.
    RatioSanity {
        ratio: f64,
    },
    /// Accumulated allocator utilities drifted from the ownership-derived
    /// ones.
    UtilityDrift {
        agent: usize,
        stored: f64,
        derived: f64,
    },
    /// The operation requires a different source shape.
    WrongSource(&'static str),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Allocator(e) => write!(f, "allocator: {e}"),
            Self::Adversary(e) => write!(f, "source: {e}"),
            Self::Domain(e) => write!(f, "domain: {e}"),
            Self::Oracle(e) => write!(f, "oracle: {e}"),
            Self::Io(e) => write!(f, "io: {e}"),
            Self::TraceMismatch {
                item,
                expected,
                got,
            } => write!(
                f,
                "trace mismatch at item {}: replay chose agent {}, trace has {}",
                item + 1,
                expected + 1,
                got + 1
            ),
            Self::TraceLength { expected, got } => {
                write!(f, "trace covers {got} items, instance has {expected}")
            }
            Self::ZeroTrials => write!(f, "trial count must be positive"),
            Self::SizesNotIncreasing => write!(f, "size grid must be strictly increasing"),
            Self::OptNotExact => write!(f, "oracle could not certify exactness"),
            Self::OptUnavailable => write!(f, "no certified or computed optimum available"),
            Self::RatioSanity { ratio } => {
                write!(
                    f,
                    "online welfare exceeds exact offline optimum (ratio {ratio})"
                )
            }
            Self::UtilityDrift {
                agent,
                stored,
                derived,
            } => write!(
                f,
                "agent {} utility drifted: stored {stored}, derived {derived}",
                agent + 1
            ),
            Self::WrongSource(what) => write!(f, "operation requires {what}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<AllocatorError> for HarnessError {
    fn from(e: AllocatorError) -> Self {
        Self::Allocator(e)
    }
}

impl From<AdversaryError> for HarnessError {
    fn from(e: AdversaryError) -> Self {
        Self::Adversary(e)
    }
}

impl From<DomainError> for HarnessError {
    fn from(e: DomainError) -> Self {
        Self::Domain(e)
    }
}

impl From<OracleError> for HarnessError {
    fn from(e: OracleError) -> Self {
        Self::Oracle(e)
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

/// Declarative description of an item source, as named in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SourceSpec {
    /// A fixed instance, e.g. loaded from a JSONL file.
    Replay { instance: Instance },
    /// k all-ones items then (n-1)k items worthless to `i_star`; OPT = k.
    TwoPhase { n: usize, k: usize, i_star: usize },
    /// The n-item hidden-permutation instance; OPT = 1.
    Permutation { tau: Vec<usize> },
    /// The two-agent snack sequence from the motivating example.
    Snack,
    /// The six-item pass-chain balancing showcase.
    PassChainShowcase,
    /// Adaptive: one all-ones item, then items worthless to a bystander.
    ZeroRatio { n: usize },
    /// Adaptive: deficiency-priced build phase plus punishment tail.
    Deficiency {
        n: usize,
        r: f64,
        c: f64,
        #[serde(default)]
        round_cap: Option<usize>,
    },
    /// Adaptive: the two-agent greedy killer; eps = 1 / inverse_eps.
    GreedyKiller { inverse_eps: u64 },
    /// i.i.d.: the single/adjacent-pair indicator distribution (even n).
    IidMatching { n: usize, m: usize },
    /// i.i.d.: the same vector every arrival.
    IidConstant { values: Vec<f64>, m: usize },
    /// i.i.d.: independent uniform [0,1] values.
    IidUniform { n: usize, m: usize },
    /// i.i.d.: a finite table of (vector, probability) atoms.
    IidDiscrete {
        atoms: Vec<(Vec<f64>, f64)>,
        m: usize,
    },
}

impl SourceSpec {
    pub fn n(&self) -> usize {
        match self {
            Self::Replay { instance } => instance.n(),
            Self::TwoPhase { n, .. } => *n,
            Self::Permutation { tau } => tau.len(),
            Self::Snack => 2,
            Self::PassChainShowcase => 3,
            Self::ZeroRatio { n } => *n,
            Self::Deficiency { n, .. } => *n,
            Self::GreedyKiller { .. } => 2,
            Self::IidMatching { n, .. } | Self::IidUniform { n, .. } => *n,
            Self::IidConstant { values, .. } => values.len(),
            Self::IidDiscrete { atoms, .. } => atoms.first().map_or(0, |(v, _)| v.len()),
        }
    }

    /// Stable identifier for reports. Kept free of commas so it can sit in
    /// an unquoted CSV field.
    pub fn id(&self) -> String {
        match self {
            Self::Replay { instance } => {
                format!("replay(n={};m={})", instance.n(), instance.m())
            }
            Self::TwoPhase { n, k, i_star } => {
                format!("two_phase(n={n};k={k};i_star={})", i_star + 1)
            }
            Self::Permutation { tau } => {
                let t: Vec<String> = tau.iter().map(|a| (a + 1).to_string()).collect();
                format!("permutation(tau={})", t.join("-"))
            }
            Self::Snack => "snack".to_string(),
            Self::PassChainShowcase => "pass_chain_showcase".to_string(),
            Self::ZeroRatio { n } => format!("zero_ratio(n={n})"),
            Self::Deficiency { n, r, c, .. } => format!("deficiency(n={n};r={r};c={c})"),
            Self::GreedyKiller { inverse_eps } => format!("greedy_killer(eps=1/{inverse_eps})"),
            Self::IidMatching { n, m } => format!("iid_matching(n={n};m={m})"),
            Self::IidConstant { values, m } => {
                let vs: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                format!("iid_constant(values={};m={m})", vs.join("-"))
            }
            Self::IidUniform { n, m } => format!("iid_uniform(n={n};m={m})"),
            Self::IidDiscrete { atoms, m } => {
                format!("iid_discrete({}atoms;m={m})", atoms.len())
            }
        }
    }

    /// Whether the source reacts to the allocator's decisions.
    pub fn is_adaptive(&self) -> bool {
        matches!(
            self,
            Self::ZeroRatio { .. } | Self::Deficiency { .. } | Self::GreedyKiller { .. }
        )
    }

    /// Whether the emitted sequence depends on the trial seed.
    pub fn randomized(&self) -> bool {
        matches!(
            self,
            Self::IidMatching { .. } | Self::IidUniform { .. } | Self::IidDiscrete { .. }
        )
    }

    pub fn is_iid(&self) -> bool {
        matches!(
            self,
            Self::IidMatching { .. }
                | Self::IidConstant { .. }
                | Self::IidUniform { .. }
                | Self::IidDiscrete { .. }
        )
    }

    fn sampler_kind(&self) -> Result<(SamplerKind, usize), HarnessError> {
        match self {
            Self::IidMatching { n, m } => Ok((SamplerKind::Matching { n: *n }, *m)),
            Self::IidConstant { values, m } => {
                let item = ValueVector::new(values.clone())?;
                Ok((SamplerKind::Constant { item }, *m))
            }
            Self::IidUniform { n, m } => Ok((SamplerKind::Uniform { n: *n }, *m)),
            Self::IidDiscrete { atoms, m } => {
                let atoms = atoms
                    .iter()
                    .map(|(v, p)| ValueVector::new(v.clone()).map(|vv| (vv, *p)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((SamplerKind::Discrete { atoms }, *m))
            }
            _ => Err(HarnessError::WrongSource("an i.i.d. source")),
        }
    }

    /// The analytically certified offline optimum, for sources that have
    /// one independent of the realized decisions.
    pub fn certified_opt(&self) -> Option<f64> {
        match self {
            Self::TwoPhase { k, .. } => Some(two_phase_opt(*k)),
            Self::Permutation { .. } => Some(1.0),
            other if other.is_iid() => other
                .sampler_kind()
                .ok()
                .and_then(|(kind, m)| kind.certified_opt(m)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.instantiate(0).map(|_| ())
    }

    pub(crate) fn instantiate(&self, seed: u64) -> Result<SourceState, HarnessError> {
        Ok(match self {
            Self::Replay { instance } => SourceState::new_static(instance.clone(), None),
            Self::TwoPhase { n, k, i_star } => {
                SourceState::new_static(gen_two_phase(*n, *k, *i_star)?, Some(two_phase_opt(*k)))
            }
            Self::Permutation { tau } => {
                SourceState::new_static(gen_permutation_matching(tau)?, Some(1.0))
            }
            Self::Snack => SourceState::new_static(fixtures::snack_instance(), None),
            Self::PassChainShowcase => {
                SourceState::new_static(fixtures::pass_chain_showcase(), None)
            }
            Self::ZeroRatio { n } => {
                SourceState::Adaptive(AdversarySpec::ZeroRatio { n: *n }.instantiate()?)
            }
            Self::Deficiency { n, r, c, round_cap } => SourceState::Adaptive(
                AdversarySpec::Deficiency {
                    n: *n,
                    r: *r,
                    c: *c,
                    round_cap: *round_cap,
                }
                .instantiate()?,
            ),
            Self::GreedyKiller { inverse_eps } => SourceState::Adaptive(
                AdversarySpec::GreedyKiller {
                    inverse_eps: *inverse_eps,
                }
                .instantiate()?,
            ),
            iid => {
                let (kind, m) = iid.sampler_kind()?;
                let certified = kind.certified_opt(m);
                SourceState::Sampler {
                    sampler: IIDSampler::new(kind, seed)?,
                    m,
                    emitted: 0,
                    certified,
                }
            }
        })
    }
}

/// A source mid-run. One lives per trial, so variant size is irrelevant.
#[allow(clippy::large_enum_variant)]
pub(crate) enum SourceState {
    Static {
        instance: Instance,
        pos: usize,
        certified: Option<f64>,
    },
    Sampler {
        sampler: IIDSampler,
        m: usize,
        emitted: usize,
        certified: Option<f64>,
    },
    Adaptive(Box<dyn AdaptiveSource>),
}

impl SourceState {
    fn new_static(instance: Instance, certified: Option<f64>) -> Self {
        Self::Static {
            instance,
            pos: 0,
            certified,
        }
    }

    fn n(&self) -> usize {
        match self {
            Self::Static { instance, .. } => instance.n(),
            Self::Sampler { sampler, .. } => sampler.n(),
            Self::Adaptive(adv) => adv.n(),
        }
    }

    fn next(&mut self, last: Option<usize>) -> Result<SourceStep, AdversaryError> {
        match self {
            Self::Static { instance, pos, .. } => {
                if *pos < instance.m() {
                    let item = instance.item(*pos).clone();
                    *pos += 1;
                    Ok(SourceStep::Item(item))
                } else {
                    Ok(SourceStep::Stop(StopReason::Exhausted))
                }
            }
            Self::Sampler {
                sampler,
                m,
                emitted,
                ..
            } => {
                if emitted < m {
                    *emitted += 1;
                    Ok(SourceStep::Item(sampler.draw()))
                } else {
                    Ok(SourceStep::Stop(StopReason::Exhausted))
                }
            }
            Self::Adaptive(adv) => adv.next(last),
        }
    }

    fn certified_opt(&self) -> Option<f64> {
        match self {
            Self::Static { certified, .. } | Self::Sampler { certified, .. } => *certified,
            Self::Adaptive(adv) => adv.certified_opt(),
        }
    }
}

/// How a trial obtains the offline optimum of its realized sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMode {
    /// Record no optimum.
    Skip,
    /// Use the source's certified optimum when present, else none.
    CertifiedOnly,
    /// Certified optimum when present, else solve with this node budget;
    /// budget exhaustion downgrades the record to inexact, never silently.
    Auto { budget: u64 },
    /// Always solve, ignoring certification (for cross-checks).
    SolveOnly { budget: u64 },
}

#[derive(Debug, Clone)]
pub struct TrialOptions {
    pub oracle: OracleMode,
    pub record_prefix_welfare: bool,
    pub record_trace: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            oracle: OracleMode::Skip,
            record_prefix_welfare: false,
            record_trace: false,
        }
    }
}

/// One row of the per-step trace log. Agents are 1-based here, matching the
/// CSV the row is written to.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub j: usize,
    pub agent: usize,
    pub scores: Vec<f64>,
    pub welfare_so_far: f64,
}

/// The record of one trial, as persisted to the report CSV.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub run_id: String,
    pub algorithm: String,
    pub source: String,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub alg_welfare: f64,
    pub opt: Option<f64>,
    pub opt_exact: Option<bool>,
    /// alg_welfare / opt; undefined when the optimum is 0 or unavailable.
    pub ratio: Option<f64>,
    pub stop_reason: StopReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefix_welfare: Option<Vec<f64>>,
}

/// A trial's record plus the materials needed for replay and dumps.
#[derive(Debug)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    /// The item sequence the allocator actually saw.
    pub realized: Instance,
    pub decisions: Vec<usize>,
    pub trace: Option<Vec<TraceRow>>,
}

/// Feeds one allocator one source until the source stops, then scores the
/// outcome.
///
/// `seed` is this trial's seed; the sampler stream and the allocator's
/// random stream are split off it. For adaptive sources every decision is
/// reported back to the source before the next item is requested.
pub fn run_trial(
    run_id: &str,
    alloc_factory: &dyn AllocatorFactory,
    source: &SourceSpec,
    seed: u64,
    opts: &TrialOptions,
) -> Result<TrialOutcome, HarnessError> {
    let mut state = source.instantiate(split_seed(seed, 0))?;
    let n = state.n();
    let mut alloc = alloc_factory.build(n, split_seed(seed, 1))?;

    let mut items: Vec<ValueVector> = Vec::new();
    let mut decisions: Vec<usize> = Vec::new();
    let mut trace = if opts.record_trace {
        Some(Vec::new())
    } else {
        None
    };
    let mut prefix_welfare = if opts.record_prefix_welfare {
        Some(Vec::new())
    } else {
        None
    };
    let mut last = None;
    let stop_reason;
    loop {
        match state.next(last)? {
            SourceStep::Item(item) => {
                let decision = alloc.step(&item)?;
                last = Some(decision.agent);
                let welfare_so_far = alloc
                    .utilities()
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                if let Some(trace) = trace.as_mut() {
                    trace.push(TraceRow {
                        j: items.len() + 1,
                        agent: decision.agent + 1,
                        scores: decision.scores,
                        welfare_so_far,
                    });
                }
                if let Some(pw) = prefix_welfare.as_mut() {
                    pw.push(welfare_so_far);
                }
                items.push(item);
                decisions.push(decision.agent);
            }
            SourceStep::Stop(reason) => {
                stop_reason = reason;
                break;
            }
        }
    }

    // Values above 1 (capped instances) must survive the realized rebuild.
    let max_value = items
        .iter()
        .flat_map(|i| i.values().iter().copied())
        .fold(0.0f64, f64::max);
    let eta = if max_value > 1.0 {
        Some(max_value)
    } else {
        None
    };
    let realized = Instance::with_cap(n, items, eta)?;
    let allocation = Allocation::from_owners(&realized, &decisions)?;

    // Partition invariant: the allocator's running utilities must agree
    // with a re-derivation from ownership.
    for (agent, (&stored, &derived)) in alloc
        .utilities()
        .iter()
        .zip(allocation.utilities().iter())
        .enumerate()
    {
        if (stored - derived).abs() > UTILITY_SLACK {
            return Err(HarnessError::UtilityDrift {
                agent,
                stored,
                derived,
            });
        }
    }

    let alg_welfare = egalitarian_welfare(&allocation, &realized)?;
    let certified = state.certified_opt();
    let (opt, opt_ex) = match opts.oracle {
        OracleMode::Skip => (None, None),
        OracleMode::CertifiedOnly => (certified, certified.map(|_| true)),
        OracleMode::Auto { budget } => match certified {
            Some(v) => (Some(v), Some(true)),
            None => {
                let res = opt_exact(&realized, budget)?;
                (Some(res.opt_value), Some(res.exact))
            }
        },
        OracleMode::SolveOnly { budget } => {
            let res = opt_exact(&realized, budget)?;
            (Some(res.opt_value), Some(res.exact))
        }
    };
    let ratio = match opt {
        Some(o) if o > 0.0 => Some(alg_welfare / o),
        _ => None,
    };
    if opt_ex == Some(true) {
        if let Some(r) = ratio {
            if r > 1.0 + 1e-9 {
                return Err(HarnessError::RatioSanity { ratio: r });
            }
        }
    }

    Ok(TrialOutcome {
        record: TrialRecord {
            run_id: run_id.to_string(),
            algorithm: alloc_factory.id(),
            source: source.id(),
            seed,
            n,
            m: realized.m(),
            alg_welfare,
            opt,
            opt_exact: opt_ex,
            ratio,
            stop_reason,
            prefix_welfare,
        },
        realized,
        decisions,
        trace,
    })
}

/// Runs `trials` independent trials with fan-out seeds and returns them in
/// trial order.
pub fn run_trials(
    alloc_factory: &dyn AllocatorFactory,
    source: &SourceSpec,
    trials: usize,
    master_seed: u64,
    opts: &TrialOptions,
    workers: usize,
) -> Result<Vec<TrialOutcome>, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let outcomes = parallel::run_indexed(trials, workers, |t| {
        run_trial(
            &t.to_string(),
            alloc_factory,
            source,
            split_seed(master_seed, t as u64),
            opts,
        )
    });
    outcomes.into_iter().collect()
}

/// A Monte-Carlo strict-ratio estimate on one fixed instance.
#[derive(Debug, Clone, Serialize)]
pub struct StrictRatioEstimate {
    pub opt: f64,
    pub mean_alg: f64,
    pub ci_half_width_alg: f64,
    /// E[ALG] / OPT; `None` when OPT = 0 (not applicable).
    pub ratio: Option<f64>,
    pub ratio_ci_half_width: Option<f64>,
    pub trials: usize,
}

/// Estimates E[ALG(sigma)] / OPT(sigma) on a fixed instance: a single run
/// for deterministic allocators, `trials` Monte-Carlo runs otherwise, with
/// a 95% normal-approximation interval. The oracle must solve the instance
/// exactly.
pub fn estimate_strict_ratio(
    alloc_factory: &dyn AllocatorFactory,
    inst: &Instance,
    trials: usize,
    master_seed: u64,
    oracle_budget: u64,
    workers: usize,
) -> Result<StrictRatioEstimate, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let solved = opt_exact(inst, oracle_budget)?;
    if !solved.exact {
        return Err(HarnessError::OptNotExact);
    }
    let opt = solved.opt_value;
    let source = SourceSpec::Replay {
        instance: inst.clone(),
    };
    let effective_trials = if alloc_factory.deterministic() {
        1
    } else {
        trials
    };
    let opts = TrialOptions::default();
    let outcomes = run_trials(
        alloc_factory,
        &source,
        effective_trials,
        master_seed,
        &opts,
        workers,
    )?;
    let welfares: Vec<f64> = outcomes.iter().map(|o| o.record.alg_welfare).collect();
    let mean_alg = stats::mean(&welfares);
    let ci = stats::ci95_half_width(&welfares);
    let (ratio, ratio_ci) = if opt > 0.0 {
        (Some(mean_alg / opt), Some(ci / opt))
    } else {
        (None, None)
    };
    Ok(StrictRatioEstimate {
        opt,
        mean_alg,
        ci_half_width_alg: ci,
        ratio,
        ratio_ci_half_width: ratio_ci,
        trials: effective_trials,
    })
}

/// Where an i.i.d. estimate's optimum came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptBasis {
    Certified,
    Oracle { all_exact: bool },
    Unavailable,
}

/// Monte-Carlo estimate under i.i.d. arrivals: the ratio of expectations
/// E[ALG] / E[OPT], not the expectation of per-sequence ratios.
#[derive(Debug, Clone, Serialize)]
pub struct IidEstimate {
    pub m: usize,
    pub trials: usize,
    pub mean_alg: f64,
    pub ci_half_width_alg: f64,
    pub mean_opt: Option<f64>,
    pub opt_basis: OptBasis,
    pub ratio_of_means: Option<f64>,
}

/// Runs `trials` i.i.d. trials. The expected optimum comes from the
/// sampler's certificate when it has one, else from per-sample oracle calls
/// when a budget is supplied, else it is reported unavailable.
pub fn monte_carlo_iid(
    alloc_factory: &dyn AllocatorFactory,
    source: &SourceSpec,
    trials: usize,
    master_seed: u64,
    oracle_budget: Option<u64>,
    workers: usize,
) -> Result<IidEstimate, HarnessError> {
    if !source.is_iid() {
        return Err(HarnessError::WrongSource("an i.i.d. source"));
    }
    if trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let certified = source.certified_opt();
    let oracle_mode = match (certified, oracle_budget) {
        (Some(_), _) => OracleMode::CertifiedOnly,
        (None, Some(budget)) => OracleMode::Auto { budget },
        (None, None) => OracleMode::Skip,
    };
    let opts = TrialOptions {
        oracle: oracle_mode,
        ..Default::default()
    };
    let outcomes = run_trials(alloc_factory, source, trials, master_seed, &opts, workers)?;
    let welfares: Vec<f64> = outcomes.iter().map(|o| o.record.alg_welfare).collect();
    let mean_alg = stats::mean(&welfares);
    let ci = stats::ci95_half_width(&welfares);
    let (mean_opt, opt_basis) = match certified {
        Some(v) => (Some(v), OptBasis::Certified),
        None if oracle_budget.is_some() => {
            let per_trial: Vec<f64> = outcomes
                .iter()
                .map(|o| o.record.opt.ok_or(HarnessError::OptUnavailable))
                .collect::<Result<_, _>>()?;
            let all_exact = outcomes.iter().all(|o| o.record.opt_exact == Some(true));
            (
                Some(stats::mean(&per_trial)),
                OptBasis::Oracle { all_exact },
            )
        }
        None => (None, OptBasis::Unavailable),
    };
    let ratio_of_means = match mean_opt {
        Some(o) if o > 0.0 => Some(mean_alg / o),
        _ => None,
    };
    let m = outcomes.first().map_or(0, |o| o.record.m);
    Ok(IidEstimate {
        m,
        trials,
        mean_alg,
        ci_half_width_alg: ci,
        mean_opt,
        opt_basis,
        ratio_of_means,
    })
}

/// A size-parametrized family of sources for asymptotic sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SourceFamily {
    /// Sized by the phase length k.
    TwoPhase { n: usize, i_star: usize },
    /// Sized by 1/eps.
    GreedyKiller,
}

impl SourceFamily {
    pub fn at(&self, size: u64) -> SourceSpec {
        match self {
            Self::TwoPhase { n, i_star } => SourceSpec::TwoPhase {
                n: *n,
                k: size as usize,
                i_star: *i_star,
            },
            Self::GreedyKiller => SourceSpec::GreedyKiller { inverse_eps: size },
        }
    }

    pub fn id(&self) -> String {
        match self {
            Self::TwoPhase { n, i_star } => {
                format!("two_phase_family(n={n},i_star={})", i_star + 1)
            }
            Self::GreedyKiller => "greedy_killer_family".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub size: u64,
    pub mean_opt: f64,
    pub mean_alg: f64,
    pub mean_ratio: f64,
    /// 95% half-width of the per-trial ratios.
    pub ci_half_width: f64,
    /// Whether every trial's optimum was exact or certified.
    pub all_exact: bool,
}

/// Mean ratios against instance size, plus the fitted slope of ALG against
/// OPT as the asymptotic-ratio estimate. Both the slope and the ratio at
/// the largest size are finite-size estimates of a limit.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSeries {
    pub points: Vec<SweepPoint>,
    pub alg_vs_opt_slope: Option<f64>,
    pub ratio_at_largest: Option<f64>,
}

/// Sweeps a source family over a strictly increasing size grid.
pub fn asymptotic_sweep(
    alloc_factory: &dyn AllocatorFactory,
    family: &SourceFamily,
    sizes: &[u64],
    trials: usize,
    master_seed: u64,
    oracle_budget: u64,
    workers: usize,
) -> Result<SweepSeries, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::SizesNotIncreasing);
    }
    let mut points = Vec::with_capacity(sizes.len());
    for (idx, &size) in sizes.iter().enumerate() {
        let source = family.at(size);
        let effective_trials = if alloc_factory.deterministic() && !source.randomized() {
            1
        } else {
            trials
        };
        let opts = TrialOptions {
            oracle: OracleMode::Auto {
                budget: oracle_budget,
            },
            ..Default::default()
        };
        let point_seed = split_seed(master_seed, idx as u64);
        let outcomes = run_trials(
            alloc_factory,
            &source,
            effective_trials,
            point_seed,
            &opts,
            workers,
        )?;
        let mut ratios = Vec::with_capacity(outcomes.len());
        let mut opts_seen = Vec::with_capacity(outcomes.len());
        let mut all_exact = true;
        for o in &outcomes {
            let opt = o.record.opt.ok_or(HarnessError::OptUnavailable)?;
            if opt <= 0.0 {
                return Err(HarnessError::OptUnavailable);
            }
            ratios.push(o.record.alg_welfare / opt);
            opts_seen.push(opt);
            all_exact &= o.record.opt_exact == Some(true);
        }
        let welfares: Vec<f64> = outcomes.iter().map(|o| o.record.alg_welfare).collect();
        points.push(SweepPoint {
            size,
            mean_opt: stats::mean(&opts_seen),
            mean_alg: stats::mean(&welfares),
            mean_ratio: stats::mean(&ratios),
            ci_half_width: stats::ci95_half_width(&ratios),
            all_exact,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.mean_opt).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_alg).collect();
    Ok(SweepSeries {
        alg_vs_opt_slope: stats::ols_slope(&xs, &ys),
        ratio_at_largest: points.last().map(|p| p.mean_ratio),
        points,
    })
}

/// The allocator lineup exercised by verification suites: every implemented
/// algorithm, with pinned parameters.
pub fn standard_suite() -> Vec<AllocatorSpec> {
    vec![
        AllocatorSpec::Random,
        AllocatorSpec::RoundRobin,
        AllocatorSpec::Greedy { phi: Phi::Identity },
        AllocatorSpec::Greedy { phi: Phi::Sqrt },
        AllocatorSpec::PassChain { epsilon: 0.25 },
        AllocatorSpec::Discounted { epsilon: 0.1 },
    ]
}

/// The deterministic members of [`standard_suite`].
pub fn standard_deterministic_suite() -> Vec<AllocatorSpec> {
    standard_suite()
        .into_iter()
        .filter(|s| s.deterministic())
        .collect()
}
