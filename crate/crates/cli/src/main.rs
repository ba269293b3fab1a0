mod spec;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qrecon_core::harness::{
    csv_string, format_resource_table, resource_table, run_selftest, run_sweep, summarize, write_csv, Status,
    SweepConfig,
};
use qrecon_core::metrics::{estimate_unitarity, gate_fidelity, DEFAULT_UNITARITY_SAMPLES};
use qrecon_core::reconstruct::{reconstruct, DEFAULT_DEG_TOL, DEFAULT_UNITARITY_THRESHOLD};
use qrecon_core::{ComplexMatrix, Error, Method, Warning};

use crate::spec::ChannelSpec;

/// Reconstruct the unitary part of noisy quantum channels.
#[derive(Debug, Parser)]
#[command(name = "qrecon", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Input file: a channel spec for `reconstruct`, a sweep config for `sweep`.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (JSON for `reconstruct`, CSV for `sweep`, text otherwise).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Comma-separated methods (mixed, pure, choi); overrides the config file.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "K")]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reconstruct the unitary part of one channel described by --config.
    Reconstruct {
        /// Degeneracy tolerance of the state-based routes.
        #[arg(long, default_value_t = DEFAULT_DEG_TOL)]
        deg_tol: f64,
        /// Clifford draws for the unitarity estimate (0 skips it).
        #[arg(long, default_value_t = DEFAULT_UNITARITY_SAMPLES)]
        unitarity_samples: usize,
    },
    /// Run the parameter sweep described by --config and write CSV records.
    Sweep,
    /// Print channel-use counts for each method.
    Resources {
        #[arg(long, default_value_t = 1)]
        n_min: u32,
        #[arg(long, default_value_t = 6)]
        n_max: u32,
        /// Output ranks for the general regime.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        r_out: Vec<u64>,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::NumericalFailure(_)
        | Error::DegenerateImage { .. }
        | Error::LinearDependence { .. }
        | Error::PhaseUndefined { .. }
        | Error::NonRealResult(_) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn read_input(path: Option<&Path>, what: &str) -> Result<String, Error> {
    let path = path.ok_or_else(|| Error::ConfigInvalid(format!("--config PATH is required ({what})")))?;
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn print(text: &str) -> Result<(), Error> {
    io::stdout().write_all(text.as_bytes()).map_err(Error::from)
}

#[derive(Serialize)]
struct MethodReport {
    method: Method,
    status: Status,
    error: Option<String>,
    unitary: Option<Vec<Vec<[f64; 2]>>>,
    gate_error: Option<f64>,
    min_spectral_gap: Option<f64>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct ReconstructReport {
    dim: usize,
    unitarity: Option<f64>,
    unitarity_std_error: Option<f64>,
    results: Vec<MethodReport>,
}

fn rows_of(u: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    u.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn format_matrix(rows: &[Vec<[f64; 2]>]) -> String {
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().map(|[re, im]| format!("{re:+.6}{im:+.6}i")).collect();
        out.push_str("    ");
        out.push_str(&cells.join("  "));
        out.push('\n');
    }
    out
}

fn cmd_reconstruct(common: &Common, deg_tol: f64, unitarity_samples: usize) -> Result<bool, Error> {
    let text = read_input(common.config.as_deref(), "channel spec")?;
    let channel = ChannelSpec::from_json(&text)?.build()?;
    let methods = common.methods.clone().unwrap_or_else(|| Method::ALL.to_vec());
    let unitarity = if unitarity_samples > 0 {
        Some(estimate_unitarity(&channel.map.to_choi(), unitarity_samples, common.seed.unwrap_or(0))?)
    } else {
        None
    };

    let mut all_ok = true;
    let mut results = Vec::new();
    for method in methods {
        let outcome = reconstruct(&channel.map, method, deg_tol).and_then(|mut r| {
            if let Some(u) = unitarity {
                r.flag_unitarity(u.value, DEFAULT_UNITARITY_THRESHOLD);
            }
            if channel.branch_ambiguous {
                r.warn(Warning::BranchAmbiguity);
            }
            let gate_error = match &channel.target {
                Some(t) => Some((1.0 - gate_fidelity(t, &r.unitary)?).max(0.0)),
                None => None,
            };
            Ok((r, gate_error))
        });
        results.push(match outcome {
            Ok((r, gate_error)) => MethodReport {
                method,
                status: Status::Ok,
                error: None,
                unitary: Some(rows_of(&r.unitary)),
                gate_error,
                min_spectral_gap: Some(r.diagnostics.min_spectral_gap),
                warnings: r.diagnostics.warnings.iter().map(Warning::to_string).collect(),
            },
            Err(e) => {
                if exit_code(&e) != EXIT_NUMERICAL {
                    return Err(e);
                }
                all_ok = false;
                MethodReport {
                    method,
                    status: Status::of_error(&e),
                    error: Some(e.to_string()),
                    unitary: None,
                    gate_error: None,
                    min_spectral_gap: match e {
                        Error::DegenerateImage { gap } => Some(gap),
                        _ => None,
                    },
                    warnings: Vec::new(),
                }
            }
        });
    }

    let report = ReconstructReport {
        dim: channel.map.dim(),
        unitarity: unitarity.map(|u| u.value),
        unitarity_std_error: unitarity.map(|u| u.std_error),
        results,
    };

    let mut text = format!("dimension {}\n", report.dim);
    if let Some(u) = unitarity {
        text.push_str(&format!("unitarity {:.6} +/- {:.6}\n", u.value, u.std_error));
    }
    for r in &report.results {
        text.push_str(&format!("\n[{}] {}\n", r.method, r.status));
        if let Some(e) = &r.error {
            text.push_str(&format!("  {e}\n"));
        }
        if let Some(g) = r.min_spectral_gap {
            text.push_str(&format!("  min spectral gap {g:.3e}\n"));
        }
        if let Some(e) = r.gate_error {
            text.push_str(&format!("  gate error {e:.3e}\n"));
        }
        if !r.warnings.is_empty() {
            text.push_str(&format!("  warnings: {}\n", r.warnings.join(", ")));
        }
        if let Some(u) = &r.unitary {
            text.push_str("  U =\n");
            text.push_str(&format_matrix(u));
        }
    }
    print(&text)?;
    if let Some(path) = &common.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
        write_output(path, &json)?;
    }
    Ok(all_ok)
}

fn cmd_sweep(common: &Common) -> Result<bool, Error> {
    let text = read_input(common.config.as_deref(), "sweep config")?;
    let mut cfg = SweepConfig::from_json(&text)?;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(methods) = &common.methods {
        cfg.methods = methods.clone();
    }
    let records = run_sweep(&cfg)?;
    match &common.out {
        Some(path) => {
            write_csv(&records, path)?;
            print(&summarize(&records)?)?;
        }
        None => print(&csv_string(&records)?)?,
    }
    Ok(true)
}

fn cmd_resources(common: &Common, n_min: u32, n_max: u32, r_out: &[u64]) -> Result<bool, Error> {
    if n_min > n_max {
        return Err(Error::InvalidArgument(format!("--n-min {n_min} exceeds --n-max {n_max}")));
    }
    let table = format_resource_table(&resource_table(n_min..=n_max, r_out)?);
    match &common.out {
        Some(path) => write_output(path, &table)?,
        None => print(&table)?,
    }
    Ok(true)
}

fn cmd_selftest(common: &Common) -> Result<bool, Error> {
    let outcomes = run_selftest();
    let text: String = outcomes.iter().map(|o| format!("{o}\n")).collect();
    match &common.out {
        Some(path) => write_output(path, &text)?,
        None => print(&text)?,
    }
    Ok(outcomes.iter().all(|o| o.passed))
}

fn run(cli: &Cli) -> Result<bool, Error> {
    if let Some(jobs) = cli.common.jobs {
        if jobs == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {jobs} workers: {e}")))?;
    }
    match &cli.command {
        Command::Reconstruct {
            deg_tol,
            unitarity_samples,
        } => cmd_reconstruct(&cli.common, *deg_tol, *unitarity_samples),
        Command::Sweep => cmd_sweep(&cli.common),
        Command::Resources { n_min, n_max, r_out } => cmd_resources(&cli.common, *n_min, *n_max, r_out),
        Command::Selftest => cmd_selftest(&cli.common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NUMERICAL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
