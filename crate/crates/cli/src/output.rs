//! Result rows and their CSV/JSON writers.
//!
//! CSV files open with a `# generated` comment line and JSON documents carry
//! a `"generated"` field; everything else is a deterministic function of the
//! command line.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::args::Format;
use crate::error::BenchError;

/// Name of the optional timing column.
pub const WALLCLOCK_COLUMN: &str = "wallclock_ms_nonnormative";

pub fn unix_time() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|t| t.to_string()).unwrap_or_default()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|t| fmt_f64(*t)).collect::<Vec<_>>().join(";")
}

/// A row type with a fixed CSV header.
pub trait Tabular: Serialize {
    fn header(wallclock: bool) -> Vec<&'static str>;
    fn row(&self, wallclock: bool) -> Vec<String>;
}

fn with_wallclock(mut header: Vec<&'static str>, wallclock: bool) -> Vec<&'static str> {
    if wallclock {
        header.push(WALLCLOCK_COLUMN);
    }
    header
}

/// Outcome of one solver trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub trial: usize,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub order: Option<f64>,
    pub failure: Option<String>,
    pub lambda: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wallclock_ms_nonnormative: Option<f64>,
}

impl Tabular for RunRecord {
    fn header(wallclock: bool) -> Vec<&'static str> {
        with_wallclock(
            vec!["trial", "converged", "iterations", "final_residual", "order", "failure", "lambda", "residuals"],
            wallclock,
        )
    }

    fn row(&self, wallclock: bool) -> Vec<String> {
        let mut r = vec![
            self.trial.to_string(),
            self.converged.to_string(),
            self.iterations.to_string(),
            fmt_f64(self.final_residual),
            fmt_opt(self.order.map(fmt_f64)),
            self.failure.clone().unwrap_or_default(),
            join(&self.lambda),
            self.residuals.as_deref().map(join).unwrap_or_default(),
        ];
        if wallclock {
            r.push(fmt_opt(self.wallclock_ms_nonnormative.map(fmt_f64)));
        }
        r
    }
}

/// One iterate of a traced run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub i: usize,
    pub residual: f64,
    /// Norm of the step leaving this iterate; absent at the last one.
    pub step_norm: Option<f64>,
    pub lambda: Vec<f64>,
}

impl Tabular for TraceRow {
    fn header(_: bool) -> Vec<&'static str> {
        vec!["i", "residual", "step_norm", "lambda"]
    }

    fn row(&self, _: bool) -> Vec<String> {
        vec![self.i.to_string(), fmt_f64(self.residual), fmt_opt(self.step_norm.map(fmt_f64)), join(&self.lambda)]
    }
}

/// Enumeration statistics of one tensor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexRow {
    pub trial: usize,
    pub target: u64,
    pub n_restarts: u64,
    pub n_pairs: usize,
    pub n_real_pairs: usize,
    pub n_multiple_eigen: usize,
    pub restarts_to_90: Option<u64>,
    pub restarts_to_all: Option<u64>,
    pub failures: u64,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wallclock_ms_nonnormative: Option<f64>,
}

impl Tabular for ComplexRow {
    fn header(wallclock: bool) -> Vec<&'static str> {
        with_wallclock(
            vec![
                "trial",
                "target",
                "n_restarts",
                "n_pairs",
                "n_real_pairs",
                "n_multiple_eigen",
                "restarts_to_90",
                "restarts_to_all",
                "failures",
                "complete",
            ],
            wallclock,
        )
    }

    fn row(&self, wallclock: bool) -> Vec<String> {
        let mut r = vec![
            self.trial.to_string(),
            self.target.to_string(),
            self.n_restarts.to_string(),
            self.n_pairs.to_string(),
            self.n_real_pairs.to_string(),
            self.n_multiple_eigen.to_string(),
            fmt_opt(self.restarts_to_90),
            fmt_opt(self.restarts_to_all),
            self.failures.to_string(),
            self.complete.to_string(),
        ];
        if wallclock {
            r.push(fmt_opt(self.wallclock_ms_nonnormative.map(fmt_f64)));
        }
        r
    }
}

/// One eigenpair class representative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRow {
    pub trial: usize,
    pub lambda: f64,
    pub z_real: Vec<f64>,
    pub z_imag: Vec<f64>,
    pub residual: f64,
    pub is_real: bool,
    pub self_conjugate: bool,
    pub hits: usize,
}

impl Tabular for PairRow {
    fn header(_: bool) -> Vec<&'static str> {
        vec!["trial", "lambda", "z_real", "z_imag", "residual", "is_real", "self_conjugate", "hits"]
    }

    fn row(&self, _: bool) -> Vec<String> {
        vec![
            self.trial.to_string(),
            fmt_f64(self.lambda),
            join(&self.z_real),
            join(&self.z_imag),
            fmt_f64(self.residual),
            self.is_real.to_string(),
            self.self_conjugate.to_string(),
            self.hits.to_string(),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountStatus {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for CountStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountStatus::Pass => "pass",
            CountStatus::Fail => "fail",
            CountStatus::Skipped => "skipped",
        })
    }
}

/// Enumeration count check for one `(m, n, trial)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRow {
    pub m: usize,
    pub n: usize,
    pub trial: usize,
    pub target: u64,
    pub found: usize,
    pub n_restarts: u64,
    pub restarts_to_all: Option<u64>,
    pub status: CountStatus,
}

impl Tabular for CountRow {
    fn header(_: bool) -> Vec<&'static str> {
        vec!["m", "n", "trial", "target", "found", "n_restarts", "restarts_to_all", "status"]
    }

    fn row(&self, _: bool) -> Vec<String> {
        vec![
            self.m.to_string(),
            self.n.to_string(),
            self.trial.to_string(),
            self.target.to_string(),
            self.found.to_string(),
            self.n_restarts.to_string(),
            fmt_opt(self.restarts_to_all),
            self.status.to_string(),
        ]
    }
}

/// Aggregate over the trials of a solve command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub command: String,
    pub solver: String,
    pub trials: usize,
    pub converged: usize,
    pub convergence_fraction: f64,
    /// Mean over converged trials.
    pub mean_iterations: Option<f64>,
    /// Mean over trials with an order estimate.
    pub mean_order: Option<f64>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, k) = v.fold((0.0, 0usize), |(s, k), t| (s + t, k + 1));
    (k > 0).then(|| s / k as f64)
}

impl Summary {
    pub fn from_records(command: &str, solver: &str, records: &[RunRecord]) -> Self {
        let converged = records.iter().filter(|r| r.converged).count();
        Summary {
            command: command.into(),
            solver: solver.into(),
            trials: records.len(),
            converged,
            convergence_fraction: converged as f64 / records.len().max(1) as f64,
            mean_iterations: mean(records.iter().filter(|r| r.converged).map(|r| r.iterations as f64)),
            mean_order: mean(records.iter().filter_map(|r| r.order)),
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map(|t| format!("{t:.3}")).unwrap_or_else(|| "-".into());
        write!(
            f,
            "{} solver={} trials={} converged={} fraction={:.3} mean_iterations={} mean_order={}",
            self.command,
            self.solver,
            self.trials,
            self.converged,
            self.convergence_fraction,
            opt(self.mean_iterations),
            opt(self.mean_order)
        )
    }
}

#[derive(Serialize)]
struct Document<'a, T, S> {
    generated: u64,
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<&'a S>,
    records: &'a [T],
}

fn create(path: &Path) -> Result<BufWriter<File>, BenchError> {
    File::create(path).map(BufWriter::new).map_err(|source| BenchError::Io { path: path.into(), source })
}

/// Writes `rows` to `path`; JSON documents also carry `summary`.
pub fn write_table<T: Tabular, S: Serialize>(
    path: &Path,
    format: Format,
    command: &str,
    rows: &[T],
    summary: Option<&S>,
    wallclock: bool,
) -> Result<(), BenchError> {
    let mut file = create(path)?;
    let io = |source| BenchError::Io { path: path.into(), source };
    match format {
        Format::Csv => {
            writeln!(file, "# generated unix_time={} command={command}", unix_time()).map_err(io)?;
            let mut w = csv::Writer::from_writer(file);
            w.write_record(T::header(wallclock))?;
            for r in rows {
                w.write_record(r.row(wallclock))?;
            }
            w.flush().map_err(io)?;
        }
        Format::Json => {
            let doc = Document { generated: unix_time(), command, summary, records: rows };
            serde_json::to_writer_pretty(&mut file, &doc)?;
            writeln!(file).map_err(io)?;
            file.flush().map_err(io)?;
        }
    }
    Ok(())
}
