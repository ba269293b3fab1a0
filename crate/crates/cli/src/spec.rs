//! JSON description of a single channel for the `reconstruct` command.
//!
//! A spec is either a Kraus list
//!
//! ```json
//! { "kraus": [ [[1, 0], [0, 1]] ] }
//! ```
//!
//! or a Lindblad description built from a Hamiltonian (`h0`, or a named
//! `scenario` with `n_qubits`) plus explicit `jumps` and/or qubit `noise`,
//! propagated for `time` (default one gate time). Matrix entries are either
//! real numbers or `[re, im]` pairs.

use serde::Deserialize;

use qrecon_core::channels::{
    build_liouvillian, propagate, scenario_hamiltonian, JumpTerm, NoiseSpec, Scenario, Superoperator, GATE_TIME,
};
use qrecon_core::linalg::{c, from_rows, matrix_exp, ComplexMatrix, C64};
use qrecon_core::{Error, KrausSet, Result};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

type MatrixJson = Vec<Vec<Entry>>;

fn to_matrix(m: &MatrixJson) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| match *e {
                    Entry::Real(x) => c(x, 0.0),
                    Entry::Complex([re, im]) => c(re, im),
                })
                .collect()
        })
        .collect();
    from_rows(&rows)
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ScenarioJson {
    RandomHaar { seed: u64 },
    MultiControlNot,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JumpJson {
    operator: MatrixJson,
    rate: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    kraus: Option<Vec<MatrixJson>>,
    h0: Option<MatrixJson>,
    scenario: Option<ScenarioJson>,
    n_qubits: Option<usize>,
    #[serde(default)]
    jumps: Vec<JumpJson>,
    #[serde(default)]
    noise: Vec<NoiseSpec>,
    time: Option<f64>,
}

/// A channel ready for reconstruction, with the target unitary when the spec
/// determines one.
pub struct Channel {
    pub map: Superoperator,
    pub target: Option<ComplexMatrix>,
    pub branch_ambiguous: bool,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(msg.into())
}

fn qubits_of(d: usize) -> Option<usize> {
    d.is_power_of_two().then(|| d.trailing_zeros() as usize)
}

impl ChannelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("channel spec: {e}")))
    }

    pub fn build(&self) -> Result<Channel> {
        let lindblad = self.h0.is_some()
            || self.scenario.is_some()
            || self.n_qubits.is_some()
            || !self.jumps.is_empty()
            || !self.noise.is_empty()
            || self.time.is_some();
        if let Some(ops) = &self.kraus {
            if lindblad {
                return Err(invalid("a Kraus spec takes no Lindblad fields"));
            }
            let ops = ops.iter().map(to_matrix).collect::<Result<Vec<_>>>()?;
            return Ok(Channel {
                map: KrausSet::new(ops)?.to_superoperator(),
                target: None,
                branch_ambiguous: false,
            });
        }

        let time = self.time.unwrap_or(GATE_TIME);
        if !(time.is_finite() && time >= 0.0) {
            return Err(invalid(format!("time {time} must be finite and >= 0")));
        }
        let (h0, target, n_qubits, branch_ambiguous) = match (&self.h0, self.scenario) {
            (Some(_), Some(_)) => return Err(invalid("give either h0 or scenario, not both")),
            (None, None) => return Err(invalid("spec needs one of kraus, h0 or scenario")),
            (None, Some(s)) => {
                let n = self.n_qubits.ok_or_else(|| invalid("scenario needs n_qubits"))?;
                let kind = match s {
                    ScenarioJson::RandomHaar { seed } => Scenario::RandomHaar { seed },
                    ScenarioJson::MultiControlNot => Scenario::MultiControlNot,
                };
                let scen = scenario_hamiltonian(kind, n)?;
                (scen.h0, scen.u0, Some(n), scen.branch_ambiguous)
            }
            (Some(h), None) => {
                let h = to_matrix(h)?;
                let target = matrix_exp(&(&h * c(0.0, -time)))?;
                let n = self.n_qubits.or_else(|| qubits_of(h.nrows()));
                (h, target, n, false)
            }
        };

        let mut jumps = self
            .jumps
            .iter()
            .map(|j| JumpTerm::new(to_matrix(&j.operator)?, j.rate))
            .collect::<Result<Vec<_>>>()?;
        if !self.noise.is_empty() {
            let n = n_qubits.ok_or_else(|| invalid("qubit noise needs a power-of-two dimension or n_qubits"))?;
            for spec in &self.noise {
                jumps.extend(spec.jump_terms(n)?);
            }
        }
        let map = propagate(&build_liouvillian(&h0, &jumps)?, time)?;
        Ok(Channel {
            map,
            target: Some(target),
            branch_ambiguous,
        })
    }
}
