//! Parameter sweeps over qubit count, noise strength and random trials.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{noisy_gate, scenario_hamiltonian, ChoiMatrix, NoiseKind, Scenario};
use crate::error::{Error, Result};
use crate::harness::config::{ScenarioKind, SweepConfig, TargetPattern};
use crate::linalg::ComplexMatrix;
use crate::metrics::{average_fidelity_from_process, estimate_unitarity_with_word_length, gate_fidelity, process_fidelity};
use crate::reconstruct::{reconstruct, Method};
use crate::rng::derive_seed;

/// Seed-path tags keeping the random streams of different purposes apart.
const TAG_UNITARY: u64 = 1;
const TAG_UNITARITY: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    DegenerateImage,
    LinearDependence,
    PhaseUndefined,
    /// Propagation or a decomposition failed outright.
    NumericalFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::DegenerateImage => "degenerate_image",
            Status::LinearDependence => "linear_dependence",
            Status::PhaseUndefined => "phase_undefined",
            Status::NumericalFailure => "numerical_failure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Status::Ok,
            Status::DegenerateImage,
            Status::LinearDependence,
            Status::PhaseUndefined,
            Status::NumericalFailure,
        ]
        .into_iter()
        .find(|x| x.as_str() == s)
    }

    /// Status recorded for a failed reconstruction.
    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::DegenerateImage { .. } => Status::DegenerateImage,
            Error::LinearDependence { .. } => Status::LinearDependence,
            Error::PhaseUndefined { .. } => Status::PhaseUndefined,
            _ => Status::NumericalFailure,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub method: Method,
    pub scenario: ScenarioKind,
    pub n_qubits: usize,
    pub noise_kind: NoiseKind,
    pub time_constant: f64,
    pub target_pattern: TargetPattern,
    pub trial: usize,
    pub gate_error: Option<f64>,
    pub process_error: Option<f64>,
    pub avg_error: Option<f64>,
    pub unitarity_error: Option<f64>,
    /// Batch standard error of the unitarity estimate behind
    /// `unitarity_error`.
    pub unitarity_std_error: Option<f64>,
    pub status: Status,
    pub min_spectral_gap: Option<f64>,
    /// Position of the noise grid in the config; orders records.
    pub noise_index: usize,
}

#[derive(Debug, Clone, Copy)]
struct WorkItem {
    n_qubits: usize,
    noise_index: usize,
    time_index: usize,
    /// Index of the (noise grid, time constant) pair among all such pairs.
    point: usize,
    trial: usize,
}

fn work_items(cfg: &SweepConfig) -> Vec<WorkItem> {
    let mut items = Vec::new();
    for (n_index, &n_qubits) in cfg.n_qubits_list.iter().enumerate() {
        let mut point = 0;
        for (noise_index, grid) in cfg.noise.iter().enumerate() {
            for time_index in 0..grid.time_constants.len() {
                for trial in 0..cfg.trials_for(n_index) {
                    items.push(WorkItem {
                        n_qubits,
                        noise_index,
                        time_index,
                        point,
                        trial,
                    });
                }
                point += 1;
            }
        }
    }
    items
}

/// Seed of the target unitary for a trial. It depends on the qubit count
/// and the trial only, so every noise point of a trial sees the same target.
pub fn unitary_seed(master_seed: u64, n_qubits: usize, trial: usize) -> u64 {
    derive_seed(master_seed, &[TAG_UNITARY, n_qubits as u64, trial as u64])
}

pub fn unitarity_seed(master_seed: u64, n_qubits: usize, point: usize, trial: usize) -> u64 {
    derive_seed(master_seed, &[TAG_UNITARITY, n_qubits as u64, point as u64, trial as u64])
}

fn scenario_of(cfg: &SweepConfig, n_qubits: usize, trial: usize) -> Scenario {
    match cfg.scenario {
        ScenarioKind::RandomHaar => Scenario::RandomHaar {
            seed: unitary_seed(cfg.master_seed, n_qubits, trial),
        },
        ScenarioKind::MultiControlNot => Scenario::MultiControlNot,
    }
}

struct Metrics {
    gate_error: f64,
    process_error: f64,
    avg_error: f64,
}

fn errors_against(u0: &ComplexMatrix, chi0: &ChoiMatrix, u: &ComplexMatrix) -> Result<Metrics> {
    let f_g = gate_fidelity(u0, u)?;
    let f_pro = process_fidelity(chi0, &ChoiMatrix::of_unitary(u)?)?;
    Ok(Metrics {
        gate_error: (1.0 - f_g).max(0.0),
        process_error: 1.0 - f_pro,
        avg_error: 1.0 - average_fidelity_from_process(f_pro, u0.nrows()),
    })
}

fn run_item(cfg: &SweepConfig, item: WorkItem) -> Vec<SweepRecord> {
    let grid = &cfg.noise[item.noise_index];
    let time_constant = grid.time_constants[item.time_index];
    let base = |method: Method| SweepRecord {
        method,
        scenario: cfg.scenario,
        n_qubits: item.n_qubits,
        noise_kind: grid.kind,
        time_constant,
        target_pattern: grid.pattern,
        trial: item.trial,
        gate_error: None,
        process_error: None,
        avg_error: None,
        unitarity_error: None,
        unitarity_std_error: None,
        status: Status::NumericalFailure,
        min_spectral_gap: None,
        noise_index: item.noise_index,
    };

    let prepared = (|| {
        let scen = scenario_hamiltonian(scenario_of(cfg, item.n_qubits, item.trial), item.n_qubits)?;
        let map = noisy_gate(&scen.h0, &[grid.spec(time_constant, item.n_qubits)], item.n_qubits)?;
        let chi = map.to_choi();
        let unitarity = if cfg.unitarity_samples > 0 {
            let seed = unitarity_seed(cfg.master_seed, item.n_qubits, item.point, item.trial);
            Some(estimate_unitarity_with_word_length(
                &chi,
                cfg.unitarity_samples,
                seed,
                cfg.clifford_word_length,
            )?)
        } else {
            None
        };
        let chi0 = ChoiMatrix::of_unitary(&scen.u0)?;
        Ok::<_, Error>((scen, map, chi0, unitarity))
    })();

    let Ok((scen, map, chi0, unitarity)) = prepared else {
        return cfg.methods.iter().map(|&m| base(m)).collect();
    };

    cfg.methods
        .iter()
        .map(|&method| {
            let mut rec = base(method);
            let outcome = reconstruct(&map, method, cfg.deg_tol)
                .and_then(|r| errors_against(&scen.u0, &chi0, &r.unitary).map(|m| (r, m)));
            match outcome {
                Ok((r, m)) => {
                    rec.status = Status::Ok;
                    rec.gate_error = Some(m.gate_error);
                    rec.process_error = Some(m.process_error);
                    rec.avg_error = Some(m.avg_error);
                    rec.unitarity_error = unitarity.map(|u| 1.0 - u.value);
                    rec.unitarity_std_error = unitarity.map(|u| u.std_error);
                    rec.min_spectral_gap = Some(r.diagnostics.min_spectral_gap);
                }
                Err(e) => {
                    rec.status = Status::of_error(&e);
                    if let Error::DegenerateImage { gap } = e {
                        rec.min_spectral_gap = Some(gap);
                    }
                }
            }
            rec
        })
        .collect()
}

fn sort_key(r: &SweepRecord) -> (Method, usize, usize, u64, usize) {
    // Time constants are positive, so their bit patterns sort like the values.
    (r.method, r.n_qubits, r.noise_index, r.time_constant.to_bits(), r.trial)
}

/// Runs every (qubit count, noise point, trial) item in parallel and returns
/// one record per requested method, sorted by method, qubit count, noise
/// point and trial. Reconstruction failures become record statuses; only an
/// invalid config aborts the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let mut records: Vec<SweepRecord> = work_items(cfg)
        .into_par_iter()
        .flat_map_iter(|item| run_item(cfg, item))
        .collect();
    records.sort_by_key(sort_key);
    Ok(records)
}

/// Like [`run_sweep`] on a dedicated pool of `jobs` worker threads.
pub fn run_sweep_with_jobs(cfg: &SweepConfig, jobs: usize) -> Result<Vec<SweepRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| run_sweep(cfg))
}
