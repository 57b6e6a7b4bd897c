//! Enumeration of all complex eigenpairs of a symmetric tensor by random
//! restarts of the complex Rayleigh quotient iteration.
//!
//! Pairs are counted up to `(λ, z) ~ (t^{m-2} λ, t z)` for unit `t`. Each
//! class is stored through a representative with real `λ ≥ 0`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::InstanceError;
use crate::linalg::{complexify_vector, dot, dotc, norm, realify_vector, Scalar};
use crate::multilinear::SymmetricTensor;
use crate::rng::{substream, unit_complex_vector};
use crate::solver::{rqi_schur, SolverConfig};

use super::tensor::{build_tensor_complex, complex_eigen_residual, real_eigen_residual, ComplexTensorProblem};
use crate::constraints::SphereConstraint;

/// Tolerance for [`pairs_equivalent`] and the conjugate test.
pub const DEDUP_TOL: f64 = 1e-6;
/// Eigenvalues below this modulus are not normalized.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-13;
/// Largest residual accepted into a table.
pub const ACCEPT_RESIDUAL: f64 = 1e-10;
/// Restarts per expected class in the default budget.
pub const BUDGET_FACTOR: usize = 50;

/// Number of complex eigenpair classes of a generic order-`m` tensor on
/// `n`-space: `((m-1)^n - 1)/(m - 2)`, or `n` when `m = 2`.
pub fn cartwright_count(m: usize, n: usize) -> Result<u64, InstanceError> {
    if m < 2 || n < 1 {
        return Err(InstanceError::Invalid("count needs m >= 2 and n >= 1"));
    }
    if m == 2 {
        return Ok(n as u64);
    }
    let base = (m - 1) as u64;
    let pow = base
        .checked_pow(n as u32)
        .ok_or(InstanceError::Invalid("count overflows u64"))?;
    Ok((pow - 1) / (m as u64 - 2))
}

/// Representative of an eigenpair class.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedPair {
    pub z: Vec<Complex64>,
    pub lambda: f64,
    /// `|λ|` was below [`ZERO_EIGENVALUE_TOL`]; `z` was left unchanged.
    pub zero_eigenvalue: bool,
}

/// Rotates `(λ, z)` to `(t^{m-2} λ, t z)` with `t^{m-2} λ = |λ|`.
pub fn normalize_pair(z: &[Complex64], lambda: Complex64, m: usize) -> NormalizedPair {
    let modulus = lambda.modulus();
    if modulus < ZERO_EIGENVALUE_TOL || m < 3 {
        return NormalizedPair { z: z.to_vec(), lambda: lambda.re, zero_eigenvalue: modulus < ZERO_EIGENVALUE_TOL };
    }
    let angle = libm::atan2(lambda.im, lambda.re);
    let t = Complex64::from_polar(1.0, -angle / (m - 2) as f64);
    NormalizedPair { z: z.iter().map(|v| v * t).collect(), lambda: modulus, zero_eigenvalue: false }
}

/// Whether two normalized representatives lie in the same class: `z2 = t z1`
/// with `t^{m-2} = 1`.
pub fn pairs_equivalent(z1: &[Complex64], z2: &[Complex64], m: usize, tol: f64) -> bool {
    let ip = dotc(z1, z2);
    let r = ip.modulus();
    if r < 1.0 - tol {
        return false;
    }
    let t = ip / r;
    let k = m.saturating_sub(2) as i32;
    (t.powi(k) - Complex64::new(1.0, 0.0)).modulus() <= tol
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConjugateStatus {
    SelfConjugate,
    DistinctConjugate,
}

/// `z̄` is in the class of `z` iff `(zᵀz) z̄ = z`.
pub fn conjugate_status(z: &[Complex64], tol: f64) -> ConjugateStatus {
    let u = dot(z, z);
    let diff: Vec<Complex64> = z.iter().map(|v| u * v.conj() - v).collect();
    if norm(&diff) <= tol {
        ConjugateStatus::SelfConjugate
    } else {
        ConjugateStatus::DistinctConjugate
    }
}

/// Phase `t` that makes `t z` real when `z` is a rotated real vector: the
/// conjugate phase of the largest-magnitude entry.
pub fn real_phase(z: &[Complex64]) -> Complex64 {
    let big = z
        .iter()
        .copied()
        .max_by(|a, b| a.modulus().total_cmp(&b.modulus()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    big.unit_phase().conj()
}

/// Whether some unit `t` makes `Im(t z)` vanish entrywise to `tol`.
pub fn is_real_pair(z: &[Complex64], tol: f64) -> bool {
    let t = real_phase(z);
    z.iter().all(|v| (t * v).im.abs() <= tol)
}

/// Real vector `Re(t z)` and its eigenvalue `T(x, …, x)`. For even order the
/// eigenvalue can be negative.
pub fn to_real_form(tensor: &SymmetricTensor, z: &[Complex64]) -> (Vec<f64>, f64) {
    let t = real_phase(z);
    let x: Vec<f64> = z.iter().map(|v| (t * v).re).collect();
    let x = crate::linalg::normalized(&x).unwrap_or(x);
    let lambda = dot(&x, &tensor.apply_vector(&x).expect("matching dimension"));
    (x, lambda)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenpairRecord {
    pub z: Vec<Complex64>,
    pub lambda: f64,
    pub residual: f64,
    pub is_real: bool,
    pub self_conjugate: bool,
    /// Times the class was found again after its first insertion.
    pub hits: usize,
    pub zero_eigenvalue: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted(usize),
    Duplicate(usize),
}

/// Deduplicating table of eigenpair classes.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenpairTable {
    pub records: Vec<EigenpairRecord>,
    pub m: usize,
    pub n: usize,
    pub target_count: u64,
    pub dedup_tol: f64,
}

impl EigenpairTable {
    pub fn new(m: usize, n: usize, dedup_tol: f64) -> Result<Self, InstanceError> {
        Ok(EigenpairTable { records: Vec::new(), m, n, target_count: cartwright_count(m, n)?, dedup_tol })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Classes counted against the target (zero eigenvalues excluded).
    pub fn counted(&self) -> usize {
        self.records.iter().filter(|r| !r.zero_eigenvalue).count()
    }

    pub fn is_complete(&self) -> bool {
        self.counted() as u64 >= self.target_count
    }

    pub fn completeness(&self) -> f64 {
        self.counted() as f64 / self.target_count as f64
    }

    pub fn find(&self, z: &[Complex64]) -> Option<usize> {
        self.records.iter().position(|r| pairs_equivalent(&r.z, z, self.m, self.dedup_tol))
    }

    /// Inserts `record` unless an equivalent one exists, in which case that
    /// record's hit count is incremented.
    pub fn insert(&mut self, record: EigenpairRecord) -> Result<InsertOutcome, InstanceError> {
        if let Some(i) = self.find(&record.z) {
            self.records[i].hits += 1;
            return Ok(InsertOutcome::Duplicate(i));
        }
        if !record.zero_eigenvalue && self.counted() as u64 >= self.target_count {
            return Err(InstanceError::TableFull { capacity: self.target_count as usize });
        }
        self.records.push(record);
        Ok(InsertOutcome::Inserted(self.records.len() - 1))
    }

    pub fn real_count(&self) -> usize {
        self.records.iter().filter(|r| r.is_real).count()
    }

    /// Number of eigenvalues shared by more than one class, after pairing each
    /// class with its conjugate.
    pub fn multiple_eigenvalue_count(&self) -> usize {
        let mut groups: Vec<(f64, usize)> = Vec::new();
        let mut seen_conj: Vec<Vec<Complex64>> = Vec::new();
        for r in &self.records {
            let conj: Vec<Complex64> = r.z.iter().map(|v| v.conj()).collect();
            if seen_conj.iter().any(|z| pairs_equivalent(z, &r.z, self.m, self.dedup_tol)) {
                continue;
            }
            seen_conj.push(conj);
            let tol = 1e-8 * r.lambda.abs().max(1.0);
            match groups.iter_mut().find(|(l, _)| (l - r.lambda).abs() <= tol) {
                Some(g) => g.1 += 1,
                None => groups.push((r.lambda, 1)),
            }
        }
        groups.iter().filter(|g| g.1 > 1).count()
    }
}

/// Candidate produced by one restart.
#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub restart: u64,
    pub iterations: usize,
    pub converged: bool,
    /// Normalized record and, when distinct, the record of its conjugate.
    pub records: Vec<EigenpairRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationConfig {
    pub seed: u64,
    /// Maximum number of restarts; `None` means [`BUDGET_FACTOR`] times the count.
    pub max_restarts: Option<u64>,
    pub dedup_tol: f64,
    pub solver: SolverConfig,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig { seed: 0, max_restarts: None, dedup_tol: DEDUP_TOL, solver: SolverConfig::default() }
    }
}

impl EnumerationConfig {
    pub fn budget(&self, m: usize, n: usize) -> Result<u64, InstanceError> {
        match self.max_restarts {
            Some(b) => Ok(b),
            None => Ok(cartwright_count(m, n)?.saturating_mul(BUDGET_FACTOR as u64)),
        }
    }
}

/// Restart statistics of an enumeration run.
#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationReport {
    pub table: EigenpairTable,
    /// Restarts performed.
    pub tries: u64,
    /// Restarts needed to reach 90% of the target, if reached.
    pub restarts_to_90: Option<u64>,
    /// Restarts needed to reach the full target, if reached.
    pub restarts_to_all: Option<u64>,
    /// Restarts whose iteration did not converge.
    pub failures: u64,
}

impl EnumerationReport {
    pub fn complete(&self) -> bool {
        self.table.is_complete()
    }
}

/// Complex tensor problem plus the data needed to run restarts.
#[derive(Clone, Debug)]
pub struct Enumerator {
    tensor: SymmetricTensor,
    problem: ComplexTensorProblem,
    constraint: SphereConstraint,
    cfg: EnumerationConfig,
}

impl Enumerator {
    pub fn new(tensor: SymmetricTensor, cfg: EnumerationConfig) -> Result<Self, InstanceError> {
        let (problem, constraint) = build_tensor_complex(tensor.clone())?;
        Ok(Enumerator { tensor, problem, constraint, cfg })
    }

    pub fn tensor(&self) -> &SymmetricTensor {
        &self.tensor
    }

    pub fn config(&self) -> &EnumerationConfig {
        &self.cfg
    }

    pub fn new_table(&self) -> Result<EigenpairTable, InstanceError> {
        EigenpairTable::new(self.tensor.order(), self.tensor.dim(), self.cfg.dedup_tol)
    }

    /// Runs restart `restart` from its own random stream. Independent of any
    /// other restart, so restarts may run in any order or concurrently.
    pub fn run_restart(&self, restart: u64) -> RestartOutcome {
        let n = self.tensor.dim();
        let m = self.tensor.order();
        let mut rng = substream(self.cfg.seed, restart);
        let z0 = realify_vector(&unit_complex_vector(&mut rng, n));
        let res = match rqi_schur(&self.problem, &self.constraint, &z0, &self.cfg.solver) {
            Ok(r) => r,
            Err(_) => return RestartOutcome { restart, iterations: 0, converged: false, records: Vec::new() },
        };
        let mut records = Vec::new();
        if res.converged {
            let z = complexify_vector(&res.x);
            let pair = normalize_pair(&z, Complex64::new(res.lambda[0], 0.0), m);
            if let Some(r) = self.make_record(pair.z, pair.lambda, pair.zero_eigenvalue) {
                if !r.self_conjugate {
                    let conj: Vec<Complex64> = r.z.iter().map(|v| v.conj()).collect();
                    let lam = r.lambda;
                    let zero = r.zero_eigenvalue;
                    records.push(r);
                    if let Some(c) = self.make_record(conj, lam, zero) {
                        records.push(c);
                    }
                } else {
                    records.push(r);
                }
            }
        }
        RestartOutcome { restart, iterations: res.iterations, converged: res.converged, records }
    }

    fn make_record(&self, z: Vec<Complex64>, lambda: f64, zero_eigenvalue: bool) -> Option<EigenpairRecord> {
        let residual = complex_eigen_residual(&self.tensor, &z, Complex64::new(lambda, 0.0));
        if !(residual <= ACCEPT_RESIDUAL) {
            return None;
        }
        Some(EigenpairRecord {
            is_real: is_real_pair(&z, DEDUP_TOL),
            self_conjugate: conjugate_status(&z, self.cfg.dedup_tol) == ConjugateStatus::SelfConjugate,
            z,
            lambda,
            residual,
            hits: 0,
            zero_eigenvalue,
        })
    }

    /// Sequential driver: restarts `0, 1, …` until the table is complete or
    /// the budget is spent.
    pub fn run(&self) -> Result<EnumerationReport, InstanceError> {
        let budget = self.cfg.budget(self.tensor.order(), self.tensor.dim())?;
        let mut acc = EnumerationAccumulator::new(self.new_table()?);
        for restart in 0..budget {
            acc.merge(self.run_restart(restart))?;
            if acc.table.is_complete() {
                break;
            }
        }
        Ok(acc.finish())
    }
}

/// Single-writer merge point for restart outcomes. Outcomes must be merged
/// in restart order for reproducible tables.
#[derive(Clone, Debug)]
pub struct EnumerationAccumulator {
    pub table: EigenpairTable,
    tries: u64,
    failures: u64,
    to_90: Option<u64>,
    to_all: Option<u64>,
}

impl EnumerationAccumulator {
    pub fn new(table: EigenpairTable) -> Self {
        EnumerationAccumulator { table, tries: 0, failures: 0, to_90: None, to_all: None }
    }

    pub fn merge(&mut self, outcome: RestartOutcome) -> Result<(), InstanceError> {
        self.tries += 1;
        if !outcome.converged {
            self.failures += 1;
        }
        for r in outcome.records {
            self.table.insert(r)?;
        }
        let counted = self.table.counted() as u64;
        let target = self.table.target_count;
        if self.to_90.is_none() && 10 * counted >= 9 * target {
            self.to_90 = Some(self.tries);
        }
        if self.to_all.is_none() && counted >= target {
            self.to_all = Some(self.tries);
        }
        Ok(())
    }

    pub fn finish(self) -> EnumerationReport {
        EnumerationReport {
            table: self.table,
            tries: self.tries,
            restarts_to_90: self.to_90,
            restarts_to_all: self.to_all,
            failures: self.failures,
        }
    }
}

/// Enumerates the eigenpair classes of `tensor` with default settings.
pub fn enumerate_complex(tensor: &SymmetricTensor, cfg: &EnumerationConfig) -> Result<EnumerationReport, InstanceError> {
    Enumerator::new(tensor.clone(), cfg.clone())?.run()
}

/// Residual of the real form of a real record.
pub fn real_form_residual(tensor: &SymmetricTensor, z: &[Complex64]) -> f64 {
    let (x, lambda) = to_real_form(tensor, z);
    real_eigen_residual(tensor, &x, lambda)
}
