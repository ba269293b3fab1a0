//! CSV output and per-point summaries of sweep records.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::channels::NoiseKind;
use crate::error::{Error, Result};
use crate::harness::config::{ScenarioKind, TargetPattern};
use crate::harness::sweep::{Status, SweepRecord};
use crate::reconstruct::Method;

pub const CSV_HEADER: [&str; 13] = [
    "method",
    "scenario",
    "n_qubits",
    "noise_kind",
    "time_constant",
    "target_pattern",
    "trial",
    "gate_error",
    "process_error",
    "avg_error",
    "unitarity_error",
    "status",
    "min_spectral_gap",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn record_fields(r: &SweepRecord) -> [String; 13] {
    [
        r.method.to_string(),
        r.scenario.to_string(),
        r.n_qubits.to_string(),
        r.noise_kind.as_str().to_string(),
        format_float(r.time_constant),
        r.target_pattern.to_string(),
        r.trial.to_string(),
        opt(r.gate_error),
        opt(r.process_error),
        opt(r.avg_error),
        opt(r.unitarity_error),
        r.status.to_string(),
        opt(r.min_spectral_gap),
    ]
}

pub fn write_csv_to<W: Write>(records: &[SweepRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(record_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to(records, std::io::BufWriter::new(file))
}

pub fn csv_string(records: &[SweepRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv_to(records, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

fn parse_err(line: usize, what: &str) -> Error {
    Error::Io(format!("CSV row {line}: invalid {what}"))
}

fn parse_pattern(s: &str) -> Option<TargetPattern> {
    if s == "all_qubits" {
        return Some(TargetPattern::AllQubits);
    }
    s.strip_prefix("single_qubit:")?.parse().ok().map(TargetPattern::SingleQubit)
}

fn parse_float(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Reads records written by [`write_csv_to`]. Fields absent from the CSV
/// (`unitarity_std_error`, `noise_index`) come back as `None` and 0.
pub fn read_csv_from<R: Read>(reader: R) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_reader(reader);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Io(format!("unexpected CSV header {header:?}")));
    }
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let f = |k: usize| row.get(k).unwrap_or("");
        let opt_f = |k: usize| -> Result<Option<f64>> {
            match f(k) {
                "" => Ok(None),
                s => parse_float(s).map(Some).ok_or_else(|| parse_err(line, CSV_HEADER[k])),
            }
        };
        let scenario = match f(1) {
            "random_haar" => ScenarioKind::RandomHaar,
            "multi_control_not" => ScenarioKind::MultiControlNot,
            _ => return Err(parse_err(line, "scenario")),
        };
        let noise_kind = match f(3) {
            "T1" => NoiseKind::T1,
            "T2" => NoiseKind::T2,
            _ => return Err(parse_err(line, "noise_kind")),
        };
        out.push(SweepRecord {
            method: f(0).parse::<Method>().map_err(|_| parse_err(line, "method"))?,
            scenario,
            n_qubits: f(2).parse().map_err(|_| parse_err(line, "n_qubits"))?,
            noise_kind,
            time_constant: parse_float(f(4)).ok_or_else(|| parse_err(line, "time_constant"))?,
            target_pattern: parse_pattern(f(5)).ok_or_else(|| parse_err(line, "target_pattern"))?,
            trial: f(6).parse().map_err(|_| parse_err(line, "trial"))?,
            gate_error: opt_f(7)?,
            process_error: opt_f(8)?,
            avg_error: opt_f(9)?,
            unitarity_error: opt_f(10)?,
            unitarity_std_error: None,
            status: Status::parse(f(11)).ok_or_else(|| parse_err(line, "status"))?,
            min_spectral_gap: opt_f(12)?,
            noise_index: 0,
        });
    }
    Ok(out)
}

/// Aggregate over the trials of one (method, noise point).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub scenario: ScenarioKind,
    pub n_qubits: usize,
    pub noise_kind: NoiseKind,
    pub time_constant: f64,
    pub target_pattern: TargetPattern,
    pub n_records: usize,
    pub n_ok: usize,
    /// Mean and sample standard deviation (n − 1) of the gate error over the
    /// `Ok` records; `None` without any.
    pub mean_gate_error: Option<f64>,
    pub std_gate_error: Option<f64>,
    pub mean_unitarity_error: Option<f64>,
    /// Standard error of `mean_unitarity_error` from the per-trial batch
    /// errors, when available.
    pub unitarity_error_se: Option<f64>,
    pub status_counts: BTreeMap<Status, usize>,
}

impl SummaryRow {
    pub fn count(&self, status: Status) -> usize {
        self.status_counts.get(&status).copied().unwrap_or(0)
    }
}

type GroupKey = (Method, ScenarioKind, usize, NoiseKind, TargetPattern, u64);

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn sample_std(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Some(0.0);
    }
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

pub fn summary_rows(records: &[SweepRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<GroupKey, Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        let key = (
            r.method,
            r.scenario,
            r.n_qubits,
            r.noise_kind,
            r.target_pattern,
            r.time_constant.to_bits(),
        );
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((method, scenario, n_qubits, noise_kind, target_pattern, t_bits), rs)| {
            let ok: Vec<&SweepRecord> = rs.iter().copied().filter(|r| r.status == Status::Ok).collect();
            let gate: Vec<f64> = ok.iter().filter_map(|r| r.gate_error).collect();
            let unit: Vec<f64> = ok.iter().filter_map(|r| r.unitarity_error).collect();
            let se: Vec<f64> = ok.iter().filter_map(|r| r.unitarity_std_error).collect();
            let unitarity_error_se = (!se.is_empty() && se.len() == unit.len())
                .then(|| se.iter().map(|s| s * s).sum::<f64>().sqrt() / se.len() as f64);
            let mut status_counts = BTreeMap::new();
            for r in &rs {
                *status_counts.entry(r.status).or_insert(0) += 1;
            }
            SummaryRow {
                method,
                scenario,
                n_qubits,
                noise_kind,
                time_constant: f64::from_bits(t_bits),
                target_pattern,
                n_records: rs.len(),
                n_ok: ok.len(),
                mean_gate_error: mean(&gate),
                std_gate_error: sample_std(&gate),
                mean_unitarity_error: mean(&unit),
                unitarity_error_se,
                status_counts,
            }
        })
        .collect()
}

/// Human-readable table of [`summary_rows`].
pub fn summarize(records: &[SweepRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to summarize".into()));
    }
    let cell = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6} {:<17} {:>2} {:<4} {:>10} {:<15} {:>7} {:>10} {:>10} {:>10}",
        "method", "scenario", "N", "kind", "time", "pattern", "ok", "gate_err", "sigma", "1-u"
    );
    for s in summary_rows(records) {
        let _ = writeln!(
            out,
            "{:<6} {:<17} {:>2} {:<4} {:>10} {:<15} {:>7} {:>10} {:>10} {:>10}",
            s.method.as_str(),
            s.scenario.as_str(),
            s.n_qubits,
            s.noise_kind.as_str(),
            format!("{:.4}", s.time_constant),
            s.target_pattern.to_string(),
            format!("{}/{}", s.n_ok, s.n_records),
            cell(s.mean_gate_error),
            cell(s.std_gate_error),
            cell(s.mean_unitarity_error),
        );
    }
    Ok(out)
}
