//! Command execution: instance setup, trial fan-out and export.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use rqi_core::error::InstanceError;
use rqi_core::instances::enumerate::{cartwright_count, EnumerationAccumulator, EnumerationConfig, EnumerationReport, Enumerator};
use rqi_core::instances::graph::{build_graph, FKind, HKind};
use rqi_core::instances::grassmann::{grassmann_rqi, GrassmannInvariant, GrassmannRho};
use rqi_core::instances::matrix::{build_matrix_eigen, LeftInverseChoice, Normalization};
use rqi_core::instances::nlep::{build_nlep, NlepNormalization, PolynomialMatrix, TwoSidedNlep};
use rqi_core::instances::stiefel::{build_stiefel, random_stiefel_point, StiefelEigen};
use rqi_core::instances::tensor::build_tensor_real;
use rqi_core::instances::two_sided::{two_sided_start, TwoSidedNorms};
use rqi_core::model::{Constraint, GeneralLagrangian};
use rqi_core::multilinear::SymmetricTensor;
use rqi_core::rng::{nonnormal_matrix, substream, symmetric_matrix, unit_complex_vector, unit_vector};
use rqi_core::solver::{
    chebyshev, convergence_order, newton_raphson, rayleigh_chebyshev_schur, rqi_schur, rqi_tangent, SolveResult, SolverConfig,
};

use crate::args::{
    Command, Common, EigArgs, FArg, GrassmannArgs, GraphArgs, HArg, MatrixKind, NlepArgs, Sides, SolverKind, StiefelArgs,
    TensorArgs, TensorComplexArgs, VerifyArgs,
};
use crate::error::BenchError;
use crate::output::{write_table, ComplexRow, CountRow, CountStatus, PairRow, RunRecord, Summary, TraceRow};
use crate::workers::{parallel_map, worker_count};

/// Largest class count enumerated without `--heavy`.
pub const DESK_BUDGET: u64 = 200;

const ALL_SOLVERS: &[SolverKind] =
    &[SolverKind::Nr, SolverKind::Chebyshev, SolverKind::RqiSchur, SolverKind::RqiTangent, SolverKind::RcSchur];
const RAYLEIGH_SOLVERS: &[SolverKind] = &[SolverKind::RqiSchur, SolverKind::RqiTangent, SolverKind::RcSchur];

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// An acceptance check did not hold.
    Fail,
}

pub fn execute(cmd: &Command) -> Result<Status, BenchError> {
    let workers = worker_count()?;
    match cmd {
        Command::Eig(a) => eig(a, workers),
        Command::TensorReal(a) => tensor_real(a, workers),
        Command::TensorComplex(a) => tensor_complex(a, workers),
        Command::Nlep(a) => nlep(a, workers),
        Command::Stiefel(a) => stiefel(a, workers),
        Command::Grassmann(a) => grassmann(a, workers),
        Command::Graph(a) => graph(a, workers),
        Command::VerifyCounts(a) => verify_counts(a, workers),
    }
}

/// Seed of trial `trial` under base seed `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(trial as u64)
}

fn solver_config(c: &Common, command: &str, allowed: &[SolverKind]) -> Result<SolverConfig, BenchError> {
    if !allowed.contains(&c.solver) {
        return Err(BenchError::usage(format!("solver {} is not available for {command}", c.solver.name())));
    }
    if !(c.tol.is_finite() && c.tol > 0.0) {
        return Err(BenchError::usage("--tol must be positive"));
    }
    if c.trace.is_some() && c.trials != 1 {
        return Err(BenchError::usage("--trace needs --trials 1"));
    }
    Ok(SolverConfig { max_iter: c.max_iter, tol_residual: c.tol, seed: c.seed, ..SolverConfig::default() })
}

fn require(ok: bool, msg: &str) -> Result<(), BenchError> {
    if ok {
        Ok(())
    } else {
        Err(BenchError::usage(msg))
    }
}

/// Runs the chosen solver from a feasible `x0`. Newton-type solvers start
/// from the Rayleigh multiplier of `x0`.
pub fn solve<G, C>(g: &G, c: &C, x0: &[f64], kind: SolverKind, cfg: &SolverConfig) -> Result<SolveResult, String>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    let result = match kind {
        SolverKind::Nr | SolverKind::Chebyshev => {
            let l0 = g.rayleigh(x0, None).map_err(|e| e.to_string())?;
            if kind == SolverKind::Nr {
                newton_raphson(g, c, x0, &l0, cfg)
            } else {
                chebyshev(g, c, x0, &l0, cfg)
            }
        }
        SolverKind::RqiSchur => rqi_schur(g, c, x0, cfg),
        SolverKind::RqiTangent => rqi_tangent(g, c, x0, cfg),
        SolverKind::RcSchur => rayleigh_chebyshev_schur(g, c, x0, cfg),
    };
    result.map_err(|e| e.to_string())
}

fn record(trial: usize, result: &Result<SolveResult, String>, keep_residuals: bool, ms: Option<f64>) -> RunRecord {
    match result {
        Ok(r) => RunRecord {
            trial,
            converged: r.converged,
            iterations: r.iterations,
            final_residual: r.final_residual(),
            order: if r.converged { convergence_order(&r.residual_history).ok() } else { None },
            failure: r.failure.map(|f| format!("{f:?}")),
            lambda: r.lambda.clone(),
            residuals: keep_residuals.then(|| r.residual_history.clone()),
            wallclock_ms_nonnormative: ms,
        },
        Err(e) => RunRecord {
            trial,
            converged: false,
            iterations: 0,
            final_residual: f64::NAN,
            order: None,
            failure: Some(e.clone()),
            lambda: Vec::new(),
            residuals: keep_residuals.then(Vec::new),
            wallclock_ms_nonnormative: ms,
        },
    }
}

/// One row per visited iterate, the start included.
pub fn trace_rows(r: &SolveResult) -> Vec<TraceRow> {
    r.residual_history
        .iter()
        .enumerate()
        .map(|(i, &residual)| TraceRow {
            i,
            residual,
            step_norm: r.step_history.get(i).copied(),
            lambda: r.lambda_history.get(i).cloned().unwrap_or_default(),
        })
        .collect()
}

/// Runs `trial(0..trials)` across workers, writes records and trace, and
/// prints the summary.
fn run_trials<F>(command: &str, c: &Common, workers: usize, trial: F) -> Result<Status, BenchError>
where
    F: Fn(usize) -> Result<SolveResult, String> + Sync,
{
    let outcomes = parallel_map(c.trials, workers, |t| {
        let start = Instant::now();
        let r = trial(t);
        (r, start.elapsed().as_secs_f64() * 1e3)
    });
    let records: Vec<RunRecord> = outcomes
        .iter()
        .enumerate()
        .map(|(t, (r, ms))| record(t, r, c.residuals, c.wallclock.then_some(*ms)))
        .collect();
    let summary = Summary::from_records(command, c.solver.name(), &records);
    if let Some(path) = &c.output {
        write_table(path, c.format, command, &records, Some(&summary), c.wallclock)?;
    }
    if let Some(path) = &c.trace {
        let rows = outcomes[0].0.as_ref().map(trace_rows).unwrap_or_default();
        write_table::<_, Summary>(path, c.format, command, &rows, None, false)?;
    }
    println!("{summary}");
    Ok(Status::Pass)
}

fn eig(a: &EigArgs, workers: usize) -> Result<Status, BenchError> {
    let cfg = solver_config(&a.common, "eig", ALL_SOLVERS)?;
    run_trials("eig", &a.common, workers, |t| {
        let mut rng = substream(a.common.seed, t as u64);
        let m = match a.matrix {
            MatrixKind::Symmetric => symmetric_matrix(&mut rng, a.n),
            MatrixKind::Nonnormal => nonnormal_matrix(&mut rng, a.n),
        };
        let x0 = unit_vector(&mut rng, a.n);
        let (p, c) = build_matrix_eigen(m, Normalization::Sphere, LeftInverseChoice::Gram).map_err(|e| e.to_string())?;
        solve(&p, &c, &x0, a.common.solver, &cfg)
    })
}

#[derive(Deserialize)]
struct TensorFile {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

/// Reads a JSON tensor `{order, dim, entries}` with row-major entries.
pub fn load_tensor(path: &Path) -> Result<SymmetricTensor, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::usage(format!("cannot read {}: {e}", path.display())))?;
    let f: TensorFile =
        serde_json::from_str(&text).map_err(|e| BenchError::usage(format!("invalid tensor file {}: {e}", path.display())))?;
    SymmetricTensor::new(f.order, f.dim, f.entries).map_err(|e| BenchError::usage(format!("invalid tensor in {}: {e}", path.display())))
}

fn tensor_source(file: Option<&Path>, m: usize) -> Result<Option<SymmetricTensor>, BenchError> {
    let t = file.map(load_tensor).transpose()?;
    require(t.as_ref().map_or(m, |t| t.order()) >= 3, "tensor order must be at least 3")?;
    Ok(t)
}

fn tensor_real(a: &TensorArgs, workers: usize) -> Result<Status, BenchError> {
    let cfg = solver_config(&a.common, "tensor-real", ALL_SOLVERS)?;
    let fixed = tensor_source(a.tensor_file.as_deref(), a.m)?;
    run_trials("tensor-real", &a.common, workers, |t| {
        let tensor = match &fixed {
            Some(t) => t.clone(),
            None => SymmetricTensor::random(a.m, a.n, trial_seed(a.common.seed, t)).map_err(|e| e.to_string())?,
        };
        let x0 = unit_vector(&mut substream(a.common.seed, t as u64), tensor.dim());
        let (p, c) = build_tensor_real(tensor).map_err(|e| e.to_string())?;
        solve(&p, &c, &x0, a.common.solver, &cfg)
    })
}

fn nlep(a: &NlepArgs, workers: usize) -> Result<Status, BenchError> {
    // The two-sided system keeps a free phase per block, so its Newton
    // Jacobian is singular at every solution.
    let allowed = match a.sides {
        Sides::One => ALL_SOLVERS,
        Sides::Two => RAYLEIGH_SOLVERS,
    };
    let cfg = solver_config(&a.common, "nlep --sides two", allowed)?;
    run_trials("nlep", &a.common, workers, |t| {
        let poly = PolynomialMatrix::random(a.n, a.degree, trial_seed(a.common.seed, t)).map_err(|e| e.to_string())?;
        let z0 = unit_complex_vector(&mut substream(a.common.seed, t as u64), a.n);
        match a.sides {
            Sides::One => {
                let (g, c, x0) = build_nlep(poly, NlepNormalization::Sphere, &z0).map_err(|e| e.to_string())?;
                solve(&g, &c, &x0, a.common.solver, &cfg)
            }
            Sides::Two => {
                let w0 = two_sided_start(&z0, &z0).ok_or("degenerate two-sided start")?;
                solve(&TwoSidedNlep::new(poly), &TwoSidedNorms { n: a.n }, &w0, a.common.solver, &cfg)
            }
        }
    })
}

fn stiefel(a: &StiefelArgs, workers: usize) -> Result<Status, BenchError> {
    let cfg = solver_config(&a.common, "stiefel", ALL_SOLVERS)?;
    require(a.p <= a.n, "--p must not exceed --n")?;
    run_trials("stiefel", &a.common, workers, |t| {
        let s = trial_seed(a.common.seed, t);
        let lag = StiefelEigen::random(a.n, a.p, 0.5, s).map_err(|e| e.to_string())?;
        let x0 = random_stiefel_point(a.n, a.p, s ^ 0x5eed);
        let (p, c) = build_stiefel(lag);
        solve(&p, &c, &x0, a.common.solver, &cfg)
    })
}

fn grassmann(a: &GrassmannArgs, workers: usize) -> Result<Status, BenchError> {
    let cfg = solver_config(&a.common, "grassmann", &[SolverKind::RqiSchur])?;
    require(a.p <= a.n, "--p must not exceed --n")?;
    require(a.alpha.is_none_or(f64::is_finite), "--alpha must be finite")?;
    run_trials("grassmann", &a.common, workers, |t| {
        let s = trial_seed(a.common.seed, t);
        let x0 = random_stiefel_point(a.n, a.p, s ^ 0x5eed);
        let r = match a.alpha {
            None => {
                let m = symmetric_matrix(&mut substream(a.common.seed, t as u64), a.n);
                let g = GrassmannInvariant::new(m, a.p).map_err(|e| e.to_string())?;
                grassmann_rqi(&g, &x0, &cfg, &mut |_| {})
            }
            Some(alpha) => {
                let g = GrassmannRho::new(GrassmannRho::laplacian(a.n, 1.0), alpha, a.p).map_err(|e| e.to_string())?;
                grassmann_rqi(&g, &x0, &cfg, &mut |_| {})
            }
        };
        r.map_err(|e| e.to_string())
    })
}

fn graph(a: &GraphArgs, workers: usize) -> Result<Status, BenchError> {
    let cfg = solver_config(&a.common, "graph", ALL_SOLVERS)?;
    require(a.perturb.is_finite() && a.perturb >= 0.0, "--perturb must be non-negative")?;
    let f = match a.f_kind {
        FArg::Linear => FKind::Linear,
        FArg::Sine => FKind::Sine,
    };
    let h = match a.h_kind {
        HArg::Constant => HKind::Constant,
        HArg::Quadratic => HKind::Quadratic,
    };
    run_trials("graph", &a.common, workers, |t| {
        let s = trial_seed(a.common.seed, t);
        let g = build_graph(a.n, f, h, s).map_err(|e| e.to_string())?;
        let x0 = g.perturbed_start(a.perturb, s ^ 0x5eed);
        solve(&g.problem, &g.constraint, &x0, a.common.solver, &cfg)
    })
}

/// Enumeration with restarts evaluated in parallel batches and merged in
/// restart order; the report equals the sequential one.
pub fn enumerate_parallel(en: &Enumerator, workers: usize) -> Result<EnumerationReport, InstanceError> {
    let tensor = en.tensor();
    let budget = en.config().budget(tensor.order(), tensor.dim())?;
    let batch = if workers <= 1 { 1 } else { 4 * workers as u64 };
    let mut acc = EnumerationAccumulator::new(en.new_table()?);
    let mut next = 0;
    while next < budget && !acc.table.is_complete() {
        let end = (next + batch).min(budget);
        let outcomes = parallel_map((end - next) as usize, workers, |k| en.run_restart(next + k as u64));
        for o in outcomes {
            acc.merge(o)?;
            if acc.table.is_complete() {
                break;
            }
        }
        next = end;
    }
    Ok(acc.finish())
}

fn check_budget(m: usize, n: usize, heavy: bool) -> Result<u64, BenchError> {
    let target = cartwright_count(m, n).map_err(|e| BenchError::usage(e.to_string()))?;
    if target > DESK_BUDGET && !heavy {
        return Err(BenchError::usage(format!(
            "m={m}, n={n} has {target} classes, above the desk budget of {DESK_BUDGET}; pass --heavy"
        )));
    }
    Ok(target)
}

/// One row of the per-size table: means over the trials.
#[derive(Serialize)]
struct ComplexSummary {
    m: usize,
    n: usize,
    target: u64,
    n_trys: usize,
    complete: usize,
    n_pairs: f64,
    n_real_pairs: f64,
    n_multiple_eigen: f64,
    restarts_90: Option<f64>,
    restarts_all: Option<f64>,
}

impl ComplexSummary {
    fn new(m: usize, n: usize, target: u64, rows: &[ComplexRow]) -> Self {
        let k = rows.len().max(1) as f64;
        let mean = |f: &dyn Fn(&ComplexRow) -> f64| rows.iter().map(f).sum::<f64>() / k;
        let mean_opt = |f: &dyn Fn(&ComplexRow) -> Option<u64>| -> Option<f64> {
            let v: Option<Vec<u64>> = rows.iter().map(f).collect();
            v.map(|v| v.iter().sum::<u64>() as f64 / k)
        };
        ComplexSummary {
            m,
            n,
            target,
            n_trys: rows.len(),
            complete: rows.iter().filter(|r| r.complete).count(),
            n_pairs: mean(&|r| r.n_pairs as f64),
            n_real_pairs: mean(&|r| r.n_real_pairs as f64),
            n_multiple_eigen: mean(&|r| r.n_multiple_eigen as f64),
            restarts_90: mean_opt(&|r| r.restarts_to_90),
            restarts_all: mean_opt(&|r| r.restarts_to_all),
        }
    }
}

impl std::fmt::Display for ComplexSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let opt = |v: Option<f64>| v.map(|t| format!("{t:.2}")).unwrap_or_else(|| "-".into());
        write!(
            f,
            "tensor-complex m={} n={} target={} n_trys={} complete={} n_pairs={:.2} n_real_pairs={:.2} n_multiple_eigen={:.2} restarts_90={} restarts_all={}",
            self.m,
            self.n,
            self.target,
            self.n_trys,
            self.complete,
            self.n_pairs,
            self.n_real_pairs,
            self.n_multiple_eigen,
            opt(self.restarts_90),
            opt(self.restarts_all)
        )
    }
}

fn tensor_complex(a: &TensorComplexArgs, workers: usize) -> Result<Status, BenchError> {
    let c = &a.common;
    let cfg = solver_config(c, "tensor-complex", &[SolverKind::RqiSchur])?;
    require(c.trace.is_none(), "--trace is not available for tensor-complex")?;
    let fixed = tensor_source(a.tensor_file.as_deref(), a.m)?;
    let (m, n) = fixed.as_ref().map_or((a.m, a.n), |t| (t.order(), t.dim()));
    let target = check_budget(m, n, a.heavy)?;
    let mut rows = Vec::with_capacity(c.trials);
    let mut pairs = Vec::new();
    for t in 0..c.trials {
        let s = trial_seed(c.seed, t);
        let tensor = match &fixed {
            Some(t) => t.clone(),
            None => SymmetricTensor::random(m, n, s).map_err(InstanceError::from)?,
        };
        let start = Instant::now();
        let ecfg = EnumerationConfig { seed: s, max_restarts: a.max_restarts, solver: cfg.clone(), ..EnumerationConfig::default() };
        let rep = enumerate_parallel(&Enumerator::new(tensor, ecfg)?, workers)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        rows.push(ComplexRow {
            trial: t,
            target,
            n_restarts: rep.tries,
            n_pairs: rep.table.counted(),
            n_real_pairs: rep.table.real_count(),
            n_multiple_eigen: rep.table.multiple_eigenvalue_count(),
            restarts_to_90: rep.restarts_to_90,
            restarts_to_all: rep.restarts_to_all,
            failures: rep.failures,
            complete: rep.complete(),
            wallclock_ms_nonnormative: c.wallclock.then_some(ms),
        });
        pairs.extend(rep.table.records.iter().map(|r| PairRow {
            trial: t,
            lambda: r.lambda,
            z_real: r.z.iter().map(|v| v.re).collect(),
            z_imag: r.z.iter().map(|v| v.im).collect(),
            residual: r.residual,
            is_real: r.is_real,
            self_conjugate: r.self_conjugate,
            hits: r.hits,
        }));
    }
    let summary = ComplexSummary::new(m, n, target, &rows);
    if let Some(path) = &c.output {
        write_table(path, c.format, "tensor-complex", &rows, Some(&summary), c.wallclock)?;
    }
    if let Some(path) = &a.pairs_output {
        write_table::<_, ComplexSummary>(path, c.format, "tensor-complex", &pairs, None, false)?;
    }
    println!("{summary}");
    Ok(Status::Pass)
}

fn verify_counts(a: &VerifyArgs, workers: usize) -> Result<Status, BenchError> {
    let (m_lo, m_hi) = a.m.map_or((a.m_min, a.m_max), |m| (m, m));
    let (n_lo, n_hi) = a.n.map_or((a.n_min, a.n_max), |n| (n, n));
    require(m_lo >= 3 && m_lo <= m_hi, "order range must satisfy 3 <= m-min <= m-max")?;
    require(n_lo >= 1 && n_lo <= n_hi, "dimension range must satisfy 1 <= n-min <= n-max")?;
    let mut rows = Vec::new();
    for m in m_lo..=m_hi {
        for n in n_lo..=n_hi {
            let target = cartwright_count(m, n).map_err(|e| BenchError::usage(e.to_string()))?;
            if target > DESK_BUDGET && !a.heavy {
                let status = CountStatus::Skipped;
                rows.push(CountRow { m, n, trial: 0, target, found: 0, n_restarts: 0, restarts_to_all: None, status });
                continue;
            }
            for t in 0..a.trials {
                let s = trial_seed(a.seed, t) ^ ((m as u64) << 48) ^ ((n as u64) << 32);
                let tensor = SymmetricTensor::random(m, n, s).map_err(InstanceError::from)?;
                let ecfg = EnumerationConfig { seed: s, max_restarts: a.max_restarts, ..EnumerationConfig::default() };
                let rep = enumerate_parallel(&Enumerator::new(tensor, ecfg)?, workers)?;
                let status = if rep.complete() { CountStatus::Pass } else { CountStatus::Fail };
                rows.push(CountRow {
                    m,
                    n,
                    trial: t,
                    target,
                    found: rep.table.counted(),
                    n_restarts: rep.tries,
                    restarts_to_all: rep.restarts_to_all,
                    status,
                });
            }
        }
    }
    if let Some(path) = &a.output {
        write_table::<_, ()>(path, a.format, "verify-counts", &rows, None, false)?;
    }
    for r in &rows {
        println!(
            "{} m={} n={} trial={} target={} found={} n_restarts={}",
            r.status.to_string().to_uppercase(),
            r.m,
            r.n,
            r.trial,
            r.target,
            r.found,
            r.n_restarts
        );
    }
    let failed = rows.iter().filter(|r| r.status == CountStatus::Fail).count();
    let checked = rows.iter().filter(|r| r.status != CountStatus::Skipped).count();
    println!("verify-counts: {}/{checked} reached", checked - failed);
    Ok(if failed == 0 { Status::Pass } else { Status::Fail })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_are_distinct() {
        let mut seen: Vec<u64> = (0..3).flat_map(|s| (0..100).map(move |t| trial_seed(s, t))).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 300);
    }

    #[test]
    fn parallel_enumeration_matches_sequential() {
        let t = SymmetricTensor::random(3, 3, 11).unwrap();
        let en = Enumerator::new(t, EnumerationConfig { seed: 4, ..EnumerationConfig::default() }).unwrap();
        let seq = en.run().unwrap();
        let par = enumerate_parallel(&en, 3).unwrap();
        assert_eq!(seq, par);
        assert!(par.complete());
    }

    #[test]
    fn trace_has_a_row_per_iterate() {
        let (p, c) = build_matrix_eigen(rqi_core::linalg::Mat::diagonal(&[1.0, 2.0, 4.0]), Normalization::Sphere, LeftInverseChoice::Gram)
            .unwrap();
        let x0 = rqi_core::linalg::normalized(&[1.0, 0.1, 0.1]).unwrap();
        let r = solve(&p, &c, &x0, SolverKind::RqiSchur, &SolverConfig::default()).unwrap();
        let rows = trace_rows(&r);
        assert_eq!(rows.len(), r.iterations + 1);
        assert!(rows.last().unwrap().step_norm.is_none());
        assert!(rows[..rows.len() - 1].iter().all(|row| row.step_norm.is_some()));
    }

    #[test]
    fn every_solver_runs_on_the_sphere() {
        let mut rng = substream(3, 0);
        let a = symmetric_matrix(&mut rng, 8);
        let x0 = unit_vector(&mut rng, 8);
        let (p, c) = build_matrix_eigen(a, Normalization::Sphere, LeftInverseChoice::Gram).unwrap();
        for &k in ALL_SOLVERS {
            let r = solve(&p, &c, &x0, k, &SolverConfig::default());
            assert!(r.is_ok(), "{}: {r:?}", k.name());
        }
    }
}
