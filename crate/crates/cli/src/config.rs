//! Experiment configuration: one JSON document, mirrored by flags, with
//! flag values overriding file values and `MAXMIN_SEED` overriding both
//! for the seed.
//!
//! Agents and permutation entries are 1-based in configs and output; the
//! library uses 0-based indices internally.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use maxmin_online::algorithms::{AllocatorSpec, Phi};
use maxmin_online::harness::{SourceFamily, SourceSpec};
use maxmin_online::jsonl;
use maxmin_online::oracle::DEFAULT_NODE_BUDGET;

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(String),
    UnknownAlgorithm(String),
    UnknownSource(String),
    MissingField {
        context: &'static str,
        field: &'static str,
    },
    EpsilonRange(f64),
    RRange(f64),
    CRange(f64),
    /// The greedy killer needs 1/eps to be a positive integer.
    KillerEpsilon(f64),
    BadPhi(String),
    BadPermutation(String),
    BadAgentIndex {
        value: usize,
        n: usize,
    },
    ZeroTrials,
    SizeGrid(String),
    NotSweepable(String),
    NotIid(String),
    BadInstanceFile(String),
    BadSeedEnv(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "config io error: {e}"),
            Self::Parse(e) => write!(f, "config parse error: {e}"),
            Self::UnknownAlgorithm(name) => write!(
                f,
                "unknown algorithm {name:?} (expected random, round_robin, greedy, pass_chain, discounted)"
            ),
            Self::UnknownSource(name) => write!(
                f,
                "unknown source {name:?} (expected replay:<path>, two_phase, permutation, snack, \
                 pass_chain_showcase, zero_ratio, deficiency, greedy_killer, iid_matching, \
                 iid_constant, iid_uniform, iid_discrete)"
            ),
            Self::MissingField { context, field } => {
                write!(f, "{context} requires the {field:?} parameter")
            }
            Self::EpsilonRange(eps) => write!(f, "epsilon {eps} outside (0,1)"),
            Self::RRange(r) => write!(f, "r {r} outside (1/2,1)"),
            Self::CRange(c) => write!(f, "c {c} is not a positive real"),
            Self::KillerEpsilon(eps) => {
                write!(f, "greedy_killer needs 1/epsilon to be a positive integer, got {eps}")
            }
            Self::BadPhi(msg) => write!(f, "{msg}"),
            Self::BadPermutation(msg) => write!(f, "tau {msg}"),
            Self::BadAgentIndex { value, n } => {
                write!(f, "agent index {value} outside 1..={n}")
            }
            Self::ZeroTrials => write!(f, "trials must be positive"),
            Self::SizeGrid(msg) => write!(f, "size_grid {msg}"),
            Self::NotSweepable(name) => {
                write!(f, "source {name:?} is not a sized family (use two_phase or greedy_killer)")
            }
            Self::NotIid(name) => write!(f, "source {name:?} is not an i.i.d. sampler"),
            Self::BadInstanceFile(msg) => write!(f, "instance file: {msg}"),
            Self::BadSeedEnv(v) => write!(f, "MAXMIN_SEED={v:?} is not a u64"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<std::io::Error> for ConfigError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

/// The JSON document shape. Every field is optional at parse time; the
/// resolver decides what the invoked subcommand actually needs.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub algorithm: Option<RawAlgorithm>,
    #[serde(default)]
    pub source: Option<RawSource>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub size_grid: Option<Vec<u64>>,
    #[serde(default)]
    pub oracle_budget: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAlgorithm {
    pub name: Option<String>,
    pub epsilon: Option<f64>,
    pub phi: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSource {
    pub name: Option<String>,
    pub path: Option<PathBuf>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    /// 1-based favored agent of the two-phase family.
    pub i_star: Option<usize>,
    pub r: Option<f64>,
    pub c: Option<f64>,
    pub round_cap: Option<usize>,
    /// 1-based permutation.
    pub tau: Option<Vec<usize>>,
    pub values: Option<Vec<f64>>,
    pub atoms: Option<Vec<(Vec<f64>, f64)>>,
    pub inverse_eps: Option<u64>,
    /// Greedy-killer epsilon; must invert to a positive integer.
    pub epsilon: Option<f64>,
}

/// Flag values, as parsed by the CLI; `None` means "not passed".
#[derive(Debug, Default, Clone)]
pub struct FlagOverrides {
    pub algorithm: Option<String>,
    pub epsilon: Option<f64>,
    pub phi: Option<String>,
    pub seed: Option<u64>,
    pub source: Option<String>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub r: Option<f64>,
    pub c: Option<f64>,
    pub trials: Option<usize>,
    pub workers: Option<usize>,
    pub oracle_budget: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn load_config_file(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Applies flags on top of the file config, then the seed env var on top of
/// everything.
pub fn merge(mut file: RawConfig, flags: &FlagOverrides) -> Result<RawConfig, ConfigError> {
    let algorithm = file.algorithm.get_or_insert_with(Default::default);
    if let Some(name) = &flags.algorithm {
        algorithm.name = Some(name.clone());
    }
    if let Some(eps) = flags.epsilon {
        algorithm.epsilon = Some(eps);
    }
    if let Some(phi) = &flags.phi {
        algorithm.phi = Some(phi.clone());
    }
    let source = file.source.get_or_insert_with(Default::default);
    if let Some(name) = &flags.source {
        // `replay:<path>` names a file through the flag interface.
        match name.strip_prefix("replay:") {
            Some(path) => {
                source.name = Some("replay".to_string());
                source.path = Some(PathBuf::from(path));
            }
            None => source.name = Some(name.clone()),
        }
    }
    if let Some(n) = flags.n {
        source.n = Some(n);
    }
    if let Some(m) = flags.m {
        source.m = Some(m);
    }
    if let Some(k) = flags.k {
        source.k = Some(k);
    }
    if let Some(r) = flags.r {
        source.r = Some(r);
    }
    if let Some(c) = flags.c {
        source.c = Some(c);
    }
    if let Some(trials) = flags.trials {
        file.trials = Some(trials);
    }
    if let Some(seed) = flags.seed {
        file.seed = Some(seed);
    }
    if let Some(workers) = flags.workers {
        file.workers = Some(workers);
    }
    if let Some(budget) = flags.oracle_budget {
        file.oracle_budget = Some(budget);
    }
    if let Some(out) = &flags.out {
        file.out = Some(out.clone());
    }
    if let Ok(seed) = std::env::var("MAXMIN_SEED") {
        file.seed = Some(seed.parse().map_err(|_| ConfigError::BadSeedEnv(seed))?);
    }
    Ok(file)
}

/// A fully resolved experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Experiment {
    pub algorithm: Option<AllocatorSpec>,
    pub source: Option<SourceSpec>,
    pub family: Option<SourceFamily>,
    pub trials: usize,
    pub seed: u64,
    pub size_grid: Vec<u64>,
    pub oracle_budget: u64,
    pub workers: usize,
    pub out: PathBuf,
}

fn check_epsilon(eps: f64) -> Result<f64, ConfigError> {
    if eps.is_finite() && eps > 0.0 && eps < 1.0 {
        Ok(eps)
    } else {
        Err(ConfigError::EpsilonRange(eps))
    }
}

fn resolve_algorithm(raw: &RawAlgorithm) -> Result<AllocatorSpec, ConfigError> {
    let name = raw.name.as_deref().ok_or(ConfigError::MissingField {
        context: "algorithm",
        field: "name",
    })?;
    match name {
        "random" => Ok(AllocatorSpec::Random),
        "round_robin" => Ok(AllocatorSpec::RoundRobin),
        "greedy" => {
            let phi = match raw.phi.as_deref() {
                None => Phi::Identity,
                Some(text) => text.parse::<Phi>().map_err(ConfigError::BadPhi)?,
            };
            Ok(AllocatorSpec::Greedy { phi })
        }
        "pass_chain" => {
            let eps = raw.epsilon.ok_or(ConfigError::MissingField {
                context: "pass_chain",
                field: "epsilon",
            })?;
            Ok(AllocatorSpec::PassChain {
                epsilon: check_epsilon(eps)?,
            })
        }
        "discounted" => {
            let eps = raw.epsilon.ok_or(ConfigError::MissingField {
                context: "discounted",
                field: "epsilon",
            })?;
            Ok(AllocatorSpec::Discounted {
                epsilon: check_epsilon(eps)?,
            })
        }
        other => Err(ConfigError::UnknownAlgorithm(other.to_string())),
    }
}

/// Converts a 1-based agent index from a config to the internal 0-based one.
fn to_zero_based(value: usize, n: usize) -> Result<usize, ConfigError> {
    if value >= 1 && value <= n {
        Ok(value - 1)
    } else {
        Err(ConfigError::BadAgentIndex { value, n })
    }
}

fn resolve_source(raw: &RawSource) -> Result<SourceSpec, ConfigError> {
    let name = raw.name.as_deref().ok_or(ConfigError::MissingField {
        context: "source",
        field: "name",
    })?;
    let need =
        |field: &'static str, context: &'static str| ConfigError::MissingField { context, field };
    let spec = match name {
        "replay" => {
            let path = raw.path.as_ref().ok_or(need("path", "replay"))?;
            let instance = jsonl::read_instance_file(path)
                .map_err(|e| ConfigError::BadInstanceFile(e.to_string()))?;
            SourceSpec::Replay { instance }
        }
        "two_phase" => {
            let n = raw.n.ok_or(need("n", "two_phase"))?;
            let k = raw.k.ok_or(need("k", "two_phase"))?;
            // The favored agent defaults to the last one.
            let i_star = to_zero_based(raw.i_star.unwrap_or(n.max(1)), n.max(1))?;
            SourceSpec::TwoPhase { n, k, i_star }
        }
        "permutation" => {
            let tau_1based = match (&raw.tau, raw.n) {
                (Some(tau), _) => tau.clone(),
                // Without an explicit tau, use the reversed identity.
                (None, Some(n)) => (1..=n).rev().collect(),
                (None, None) => return Err(need("tau", "permutation")),
            };
            let n = tau_1based.len();
            let mut tau = Vec::with_capacity(n);
            for v in &tau_1based {
                tau.push(to_zero_based(*v, n)?);
            }
            let mut seen = vec![false; n];
            for &a in &tau {
                if seen[a] {
                    return Err(ConfigError::BadPermutation(format!(
                        "{tau_1based:?} is not a permutation of 1..={n}"
                    )));
                }
                seen[a] = true;
            }
            SourceSpec::Permutation { tau }
        }
        "snack" => SourceSpec::Snack,
        "pass_chain_showcase" => SourceSpec::PassChainShowcase,
        "zero_ratio" => {
            let n = raw.n.ok_or(need("n", "zero_ratio"))?;
            SourceSpec::ZeroRatio { n }
        }
        "deficiency" => {
            let n = raw.n.ok_or(need("n", "deficiency"))?;
            let r = raw.r.ok_or(need("r", "deficiency"))?;
            let c = raw.c.ok_or(need("c", "deficiency"))?;
            if !(r > 0.5 && r < 1.0) {
                return Err(ConfigError::RRange(r));
            }
            if !c.is_finite() || c <= 0.0 {
                return Err(ConfigError::CRange(c));
            }
            SourceSpec::Deficiency {
                n,
                r,
                c,
                round_cap: raw.round_cap,
            }
        }
        "greedy_killer" => {
            // Accepts inverse_eps directly, the k flag as its alias, or a
            // raw epsilon that must invert to an integer.
            let inverse_eps = match (raw.inverse_eps, raw.k, raw.epsilon) {
                (Some(q), _, _) => q,
                (None, Some(k), _) => k as u64,
                (None, None, Some(eps)) => {
                    if !eps.is_finite() || eps <= 0.0 || eps > 1.0 {
                        return Err(ConfigError::KillerEpsilon(eps));
                    }
                    let inv = 1.0 / eps;
                    if (inv - inv.round()).abs() > 1e-9 {
                        return Err(ConfigError::KillerEpsilon(eps));
                    }
                    inv.round() as u64
                }
                (None, None, None) => {
                    return Err(need("inverse_eps (or k, or epsilon)", "greedy_killer"))
                }
            };
            if inverse_eps == 0 {
                return Err(ConfigError::KillerEpsilon(0.0));
            }
            SourceSpec::GreedyKiller { inverse_eps }
        }
        "iid_matching" => {
            let n = raw.n.ok_or(need("n", "iid_matching"))?;
            let m = raw.m.ok_or(need("m", "iid_matching"))?;
            SourceSpec::IidMatching { n, m }
        }
        "iid_constant" => {
            // The canonical two-agent (1, 1/2) stream when the config does
            // not spell out a vector (flags cannot carry arrays).
            let values = raw.values.clone().unwrap_or_else(|| vec![1.0, 0.5]);
            let m = raw.m.ok_or(need("m", "iid_constant"))?;
            SourceSpec::IidConstant { values, m }
        }
        "iid_uniform" => {
            let n = raw.n.ok_or(need("n", "iid_uniform"))?;
            let m = raw.m.ok_or(need("m", "iid_uniform"))?;
            SourceSpec::IidUniform { n, m }
        }
        "iid_discrete" => {
            let atoms = raw.atoms.clone().ok_or(need("atoms", "iid_discrete"))?;
            let m = raw.m.ok_or(need("m", "iid_discrete"))?;
            SourceSpec::IidDiscrete { atoms, m }
        }
        other => return Err(ConfigError::UnknownSource(other.to_string())),
    };
    // Surface construction problems (bad tables, odd matching n, ...) as
    // config errors before any run starts.
    spec.validate()
        .map_err(|e| ConfigError::Parse(e.to_string()))?;
    Ok(spec)
}

fn resolve_family(raw: &RawSource) -> Result<SourceFamily, ConfigError> {
    let name = raw.name.as_deref().ok_or(ConfigError::MissingField {
        context: "source",
        field: "name",
    })?;
    match name {
        "two_phase" => {
            let n = raw.n.ok_or(ConfigError::MissingField {
                context: "two_phase family",
                field: "n",
            })?;
            let i_star = to_zero_based(raw.i_star.unwrap_or(n.max(1)), n.max(1))?;
            Ok(SourceFamily::TwoPhase { n, i_star })
        }
        "greedy_killer" => Ok(SourceFamily::GreedyKiller),
        other => Err(ConfigError::NotSweepable(other.to_string())),
    }
}

/// What the invoked subcommand needs from the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    /// `run`: algorithm + concrete source.
    Run,
    /// `sweep`: algorithm + sized family + size grid.
    Sweep,
    /// `iid`: algorithm + i.i.d. source.
    Iid,
    /// `verify`: seeds and counts only.
    Verify,
    /// `oracle`: budget and output only.
    Oracle,
}

pub fn resolve(raw: &RawConfig, needs: Needs) -> Result<Experiment, ConfigError> {
    let trials = raw.trials.unwrap_or(1);
    if trials == 0 {
        return Err(ConfigError::ZeroTrials);
    }
    let workers = raw.workers.filter(|&w| w > 0).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
    });
    let mut experiment = Experiment {
        algorithm: None,
        source: None,
        family: None,
        trials,
        seed: raw.seed.unwrap_or(0),
        size_grid: raw.size_grid.clone().unwrap_or_default(),
        oracle_budget: raw.oracle_budget.unwrap_or(DEFAULT_NODE_BUDGET),
        workers,
        out: raw.out.clone().unwrap_or_else(|| PathBuf::from("out")),
    };
    let raw_algorithm = raw.algorithm.clone().unwrap_or_default();
    let raw_source = raw.source.clone().unwrap_or_default();
    match needs {
        Needs::Run => {
            experiment.algorithm = Some(resolve_algorithm(&raw_algorithm)?);
            experiment.source = Some(resolve_source(&raw_source)?);
        }
        Needs::Sweep => {
            experiment.algorithm = Some(resolve_algorithm(&raw_algorithm)?);
            experiment.family = Some(resolve_family(&raw_source)?);
            if experiment.size_grid.is_empty() {
                return Err(ConfigError::SizeGrid("is required for sweep".to_string()));
            }
            if experiment.size_grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ConfigError::SizeGrid(
                    "must be strictly increasing".to_string(),
                ));
            }
        }
        Needs::Iid => {
            experiment.algorithm = Some(resolve_algorithm(&raw_algorithm)?);
            let source = resolve_source(&raw_source)?;
            if !source.is_iid() {
                return Err(ConfigError::NotIid(source.id()));
            }
            experiment.source = Some(source);
        }
        Needs::Verify | Needs::Oracle => {}
    }
    Ok(experiment)
}
