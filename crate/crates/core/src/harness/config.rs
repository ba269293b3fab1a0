//! Sweep configuration, read from a single JSON document.
//!
//! ```json
//! {
//!   "scenario": "random_haar",
//!   "n_qubits_list": [2, 3],
//!   "noise": [{ "kind": "T1", "time_constants": [1, 10, "inf"], "pattern": "all_qubits" }],
//!   "n_trials": [30, 20],
//!   "methods": ["mixed", "pure", "choi"],
//!   "master_seed": 7
//! }
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channels::{NoiseKind, NoiseSpec, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::metrics::{DEFAULT_CLIFFORD_WORD_LENGTH, DEFAULT_UNITARITY_SAMPLES};
use crate::reconstruct::{Method, DEFAULT_DEG_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    RandomHaar,
    MultiControlNot,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::RandomHaar => "random_haar",
            ScenarioKind::MultiControlNot => "multi_control_not",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which qubits a noise grid acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPattern {
    AllQubits,
    SingleQubit(usize),
}

impl TargetPattern {
    pub fn targets(self, n_qubits: usize) -> Vec<usize> {
        match self {
            TargetPattern::AllQubits => (0..n_qubits).collect(),
            TargetPattern::SingleQubit(q) => vec![q],
        }
    }
}

impl fmt::Display for TargetPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetPattern::AllQubits => f.write_str("all_qubits"),
            TargetPattern::SingleQubit(q) => write!(f, "single_qubit:{q}"),
        }
    }
}

/// One noise axis of the sweep: a kind, a target pattern and a grid of time
/// constants in units of the gate time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseGrid {
    pub kind: NoiseKind,
    #[serde(
        default = "default_time_grid",
        serialize_with = "ser_times",
        deserialize_with = "de_times"
    )]
    pub time_constants: Vec<f64>,
    #[serde(default = "all_qubits")]
    pub pattern: TargetPattern,
}

impl NoiseGrid {
    pub fn spec(&self, time_constant: f64, n_qubits: usize) -> NoiseSpec {
        NoiseSpec::new(self.kind, time_constant, self.pattern.targets(n_qubits))
    }
}

fn all_qubits() -> TargetPattern {
    TargetPattern::AllQubits
}

/// 20 log-spaced points per decade over `[0.1, 100]`.
pub fn default_time_grid() -> Vec<f64> {
    (0..=60).map(|k| 10f64.powf(-1.0 + k as f64 / 20.0)).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TimeRepr {
    Number(f64),
    Text(String),
}

fn de_times<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<f64>, D::Error> {
    let raw = Vec::<TimeRepr>::deserialize(de)?;
    raw.into_iter()
        .map(|t| match t {
            TimeRepr::Number(x) => Ok(x),
            TimeRepr::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" => Ok(f64::INFINITY),
                other => other
                    .parse::<f64>()
                    .map_err(|_| serde::de::Error::custom(format!("invalid time constant '{s}'"))),
            },
        })
        .collect()
}

fn ser_times<S: Serializer>(times: &[f64], ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(times.len()))?;
    for &t in times {
        if t.is_infinite() {
            seq.serialize_element("inf")?;
        } else {
            seq.serialize_element(&t)?;
        }
    }
    seq.end()
}

/// Trial count for every `N`, or one count per entry of `n_qubits_list`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Trials {
    Uniform(usize),
    PerQubitCount(Vec<usize>),
}

/// Default trial counts: 30, 20, 20 and 5 for two to five qubits.
pub fn default_trials(n_qubits: usize) -> usize {
    match n_qubits {
        0..=2 => 30,
        3 | 4 => 20,
        _ => 5,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scenario: ScenarioKind,
    pub n_qubits_list: Vec<usize>,
    pub noise: Vec<NoiseGrid>,
    #[serde(default)]
    pub n_trials: Option<Trials>,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_deg_tol")]
    pub deg_tol: f64,
    /// Clifford draws per unitarity estimate; 0 skips the estimate.
    #[serde(default = "default_unitarity_samples")]
    pub unitarity_samples: usize,
    #[serde(default = "default_word_length")]
    pub clifford_word_length: usize,
    #[serde(default)]
    pub master_seed: u64,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_deg_tol() -> f64 {
    DEFAULT_DEG_TOL
}

fn default_unitarity_samples() -> usize {
    DEFAULT_UNITARITY_SAMPLES
}

fn default_word_length() -> usize {
    DEFAULT_CLIFFORD_WORD_LENGTH
}

impl SweepConfig {
    pub fn new(scenario: ScenarioKind, n_qubits_list: Vec<usize>, noise: Vec<NoiseGrid>) -> Self {
        Self {
            scenario,
            n_qubits_list,
            noise,
            n_trials: None,
            methods: all_methods(),
            deg_tol: DEFAULT_DEG_TOL,
            unitarity_samples: DEFAULT_UNITARITY_SAMPLES,
            clifford_word_length: DEFAULT_CLIFFORD_WORD_LENGTH,
            master_seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn trials_for(&self, n_index: usize) -> usize {
        match &self.n_trials {
            None => default_trials(self.n_qubits_list[n_index]),
            Some(Trials::Uniform(t)) => *t,
            Some(Trials::PerQubitCount(ts)) => ts[n_index],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.n_qubits_list.is_empty() {
            return bad("n_qubits_list is empty".into());
        }
        let min_n = match self.scenario {
            ScenarioKind::RandomHaar => 1,
            ScenarioKind::MultiControlNot => 2,
        };
        if let Some(n) = self.n_qubits_list.iter().find(|&&n| n < min_n || n > MAX_QUBITS) {
            return bad(format!("{n} qubits outside [{min_n}, {MAX_QUBITS}] for {}", self.scenario));
        }
        if self.noise.is_empty() {
            return bad("noise list is empty".into());
        }
        for grid in &self.noise {
            if grid.time_constants.is_empty() {
                return bad("empty time-constant grid".into());
            }
            if let Some(t) = grid.time_constants.iter().find(|t| t.is_nan() || **t <= 0.0) {
                return bad(format!("time constant {t} is not strictly positive"));
            }
            if let TargetPattern::SingleQubit(q) = grid.pattern {
                if let Some(n) = self.n_qubits_list.iter().find(|&&n| q >= n) {
                    return bad(format!("target qubit {q} out of range for {n} qubits"));
                }
            }
        }
        match &self.n_trials {
            Some(Trials::Uniform(0)) => return bad("n_trials must be at least 1".into()),
            Some(Trials::PerQubitCount(ts)) => {
                if ts.len() != self.n_qubits_list.len() {
                    return bad(format!(
                        "{} trial counts for {} qubit counts",
                        ts.len(),
                        self.n_qubits_list.len()
                    ));
                }
                if ts.contains(&0) {
                    return bad("n_trials must be at least 1".into());
                }
            }
            _ => {}
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        if !(self.deg_tol >= 0.0 && self.deg_tol.is_finite()) {
            return bad(format!("deg_tol {} must be finite and non-negative", self.deg_tol));
        }
        if self.unitarity_samples == 1 {
            return bad("unitarity_samples must be 0 (skip) or at least 2".into());
        }
        Ok(())
    }
}
