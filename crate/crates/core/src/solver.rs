//! Newton-Raphson, Chebyshev, Rayleigh quotient and Rayleigh-Chebyshev
//! iterations for constrained vector Lagrangians.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ModelError, SolverError};
use crate::linalg::{add, norm, null_space, Lu, Mat};
use crate::model::{projection_matrix, Constraint, GeneralLagrangian};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub tol_residual: f64,
    /// Steps longer than this abort the run as divergent.
    pub max_step_norm: f64,
    /// Second-order corrections are skipped for steps longer than this.
    pub chebyshev_step_cap: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { max_iter: 100, tol_residual: 1e-12, max_step_norm: 1e8, chebyshev_step_cap: 1.0, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    MaxIter,
    SingularLx,
    SingularSchur,
    DegenerateRetraction,
    Diverged,
    RayleighFailed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Residual at each visited iterate, starting with `x0`.
    pub residual_history: Vec<f64>,
    /// Norm of each step taken.
    pub step_history: Vec<f64>,
    /// Multiplier at each visited iterate.
    pub lambda_history: Vec<Vec<f64>>,
    pub failure: Option<FailureReason>,
}

impl SolveResult {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}

/// Progress summary inspected by [`terminal`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationState {
    pub iteration: usize,
    pub residual: f64,
    pub step_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Success,
    Failure(FailureReason),
}

pub fn terminal(state: &IterationState, cfg: &SolverConfig) -> Decision {
    if state.residual <= cfg.tol_residual {
        Decision::Success
    } else if !(state.step_norm <= cfg.max_step_norm) || !state.residual.is_finite() {
        Decision::Failure(FailureReason::Diverged)
    } else if state.iteration >= cfg.max_iter {
        Decision::Failure(FailureReason::MaxIter)
    } else {
        Decision::Continue
    }
}

/// One iteration as seen by an observer.
#[derive(Clone, Copy, Debug)]
pub struct StepRecord<'a> {
    pub iteration: usize,
    pub x: &'a [f64],
    pub lambda: &'a [f64],
    pub eta: &'a [f64],
    pub x_next: &'a [f64],
    pub residual: f64,
}

/// Ingredients of an ambient-space (Schur form) step.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurStep {
    /// `-Lx⁻¹ Lλ`.
    pub zeta: Mat,
    /// `Lx⁻¹ L`.
    pub xi: Vec<f64>,
    /// Multiplier correction solving the tangency condition.
    pub theta: Vec<f64>,
    /// `-ξ + ζ θ`.
    pub eta: Vec<f64>,
    /// `jC ζ`.
    pub jc_zeta: Mat,
}

fn solve_zeta_xi<G>(g: &G, x: &[f64], lambda: &[f64]) -> Result<(Mat, Vec<f64>), FailureReason>
where
    G: GeneralLagrangian + ?Sized,
{
    let k = g.dim_lambda();
    let neg_ll = g.llambda(x, lambda).scale(-1.0);
    let preimage = g.residual_preimage(x, lambda);
    let rhs = match preimage {
        Some(_) => neg_ll,
        None => neg_ll.hstack(&Mat::column_vector(&g.residual(x, lambda))),
    };
    let sol = g.solve_lx(x, lambda, &rhs).map_err(|_| FailureReason::SingularLx)?;
    let zeta = sol.block(0, 0, g.dim(), k);
    let xi = match preimage {
        Some(p) => p,
        None => sol.column(k),
    };
    Ok((zeta, xi))
}

/// Schur-form step with the linearized condition `jC η = -offset`.
fn schur_with_offset<G, C>(g: &G, c: &C, x: &[f64], lambda: &[f64], offset: Option<&[f64]>) -> Result<SchurStep, FailureReason>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    let (zeta, xi) = solve_zeta_xi(g, x, lambda)?;
    let jc = c.jacobian(x);
    let jc_zeta = jc.matmul(&zeta);
    let mut rhs = jc.mul_vec(&xi);
    if let Some(off) = offset {
        for (r, o) in rhs.iter_mut().zip(off) {
            *r -= o;
        }
    }
    let theta = Lu::factor(&jc_zeta)
        .and_then(|lu| lu.solve(&rhs))
        .map_err(|_| FailureReason::SingularSchur)?;
    let zt = zeta.mul_vec(&theta);
    let mut eta: Vec<f64> = xi.iter().zip(&zt).map(|(a, b)| b - a).collect();
    let mut theta = theta;
    if norm(&eta) <= REFINE_RATIO * norm(&xi) {
        refine_bordered(g, &jc, &jc_zeta, &zeta, x, lambda, offset, &mut eta, &mut theta)?;
    }
    Ok(SchurStep { zeta, xi, theta, eta, jc_zeta })
}

/// Steps shorter than this fraction of `‖ξ‖` lose digits to cancellation in
/// `ζθ - ξ` and get one round of refinement.
const REFINE_RATIO: f64 = 1e-3;

/// One step of iterative refinement on
/// `[Lx Lλ; jC 0] [η; θ] = [-L; -offset]`, reusing `ζ` for the border.
#[allow(clippy::too_many_arguments)]
fn refine_bordered<G>(
    g: &G,
    jc: &Mat,
    jc_zeta: &Mat,
    zeta: &Mat,
    x: &[f64],
    lambda: &[f64],
    offset: Option<&[f64]>,
    eta: &mut [f64],
    theta: &mut [f64],
) -> Result<(), FailureReason>
where
    G: GeneralLagrangian + ?Sized,
{
    let l = g.residual(x, lambda);
    let lx_eta = g.lx(x, lambda).mul_vec(eta);
    let ll_theta = g.llambda(x, lambda).mul_vec(theta);
    let d1: Vec<f64> = (0..eta.len()).map(|i| -l[i] - lx_eta[i] - ll_theta[i]).collect();
    let jc_eta = jc.mul_vec(eta);
    let d2: Vec<f64> = (0..jc_eta.len()).map(|i| -offset.map_or(0.0, |o| o[i]) - jc_eta[i]).collect();
    let w = g.solve_lx(x, lambda, &Mat::column_vector(&d1)).map_err(|_| FailureReason::SingularLx)?.column(0);
    let jw = jc.mul_vec(&w);
    let rhs: Vec<f64> = d2.iter().zip(&jw).map(|(a, b)| a - b).collect();
    let dtheta = Lu::factor(jc_zeta).and_then(|lu| lu.solve(&rhs)).map_err(|_| FailureReason::SingularSchur)?;
    let zd = zeta.mul_vec(&dtheta);
    for i in 0..eta.len() {
        eta[i] += w[i] + zd[i];
    }
    for (t, d) in theta.iter_mut().zip(&dtheta) {
        *t += d;
    }
    Ok(())
}

/// Schur-form step at `(x, λ)`: tangent `η` with `Lx η + Lλ θ = -L`.
pub fn schur_step<G, C>(g: &G, c: &C, x: &[f64], lambda: &[f64]) -> Result<SchurStep, FailureReason>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    schur_with_offset(g, c, x, lambda, None)
}

/// Projected system `Vᵀ Π Lx U` with `U` spanning `Null(jC)` and `V` spanning
/// `Null(H⁻)`, together with the right-hand side `-Vᵀ Π L`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentSystem {
    pub u: Mat,
    pub v: Mat,
    pub matrix: Mat,
    pub rhs: Vec<f64>,
}

pub fn tangent_system<G, C>(g: &G, c: &C, x: &[f64], lambda: &[f64]) -> Result<TangentSystem, ModelError>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    let u = null_space(&c.jacobian(x));
    let m = g.left_inverse(x, lambda)?;
    let v = null_space(&m);
    let h = g.llambda(x, lambda).scale(-1.0);
    let vt_pi = v.transpose().matmul(&projection_matrix(&h, &m));
    let matrix = vt_pi.matmul(&g.lx(x, lambda)).matmul(&u);
    let rhs: Vec<f64> = vt_pi.mul_vec(&g.residual(x, lambda)).iter().map(|v| -v).collect();
    Ok(TangentSystem { u, v, matrix, rhs })
}

/// Tangent-form step: `η = U c` with `(Vᵀ Π Lx U) c = -Vᵀ Π L`.
pub fn tangent_step<G, C>(g: &G, c: &C, x: &[f64], lambda: &[f64]) -> Result<Vec<f64>, FailureReason>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    let sys = tangent_system(g, c, x, lambda).map_err(|_| FailureReason::SingularSchur)?;
    let coef = Lu::factor(&sys.matrix)
        .and_then(|lu| lu.solve(&sys.rhs))
        .map_err(|_| FailureReason::SingularSchur)?;
    Ok(sys.u.mul_vec(&coef))
}

/// Second-order correction `τ` of the Rayleigh-Chebyshev iteration for a
/// Schur step computed at `(x, λ = R(x))`.
pub fn rayleigh_chebyshev_correction<G, C>(
    g: &G,
    c: &C,
    x: &[f64],
    lambda: &[f64],
    step: &SchurStep,
) -> Result<Vec<f64>, FailureReason>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    let eta = &step.eta;
    let jr = g.rayleigh_jacobian(x, lambda).map_err(|_| FailureReason::RayleighFailed)?;
    let d = jr.mul_vec(eta);
    let second = g.second_order(x, lambda, eta, &d).ok_or(FailureReason::RayleighFailed)?;
    let gvec: Vec<f64> = second.iter().map(|v| -0.5 * v).collect();
    let t = g
        .solve_lx(x, lambda, &Mat::column_vector(&gvec))
        .map_err(|_| FailureReason::SingularLx)?
        .column(0);
    let tau_star = add(eta, &t);
    let jc = c.jacobian(x);
    let coef = Lu::factor(&step.jc_zeta)
        .and_then(|lu| lu.solve(&jc.mul_vec(&tau_star)))
        .map_err(|_| FailureReason::SingularSchur)?;
    let corr = step.zeta.mul_vec(&coef);
    Ok(tau_star.iter().zip(&corr).map(|(a, b)| a - b).collect())
}

fn check_start<G: GeneralLagrangian + ?Sized>(g: &G, x0: &[f64]) -> Result<(), SolverError> {
    if x0.len() != g.dim() {
        return Err(SolverError::BadStart { expected: g.dim(), actual: x0.len() });
    }
    Ok(())
}

fn joint_residual(l: &[f64], cval: &[f64]) -> f64 {
    libm::hypot(norm(l), norm(cval))
}

struct History {
    residuals: Vec<f64>,
    steps: Vec<f64>,
    lambdas: Vec<Vec<f64>>,
}

impl History {
    fn new() -> Self {
        History { residuals: Vec::new(), steps: Vec::new(), lambdas: Vec::new() }
    }

    fn finish(self, x: Vec<f64>, lambda: Vec<f64>, iterations: usize, failure: Option<FailureReason>) -> SolveResult {
        SolveResult {
            x,
            lambda,
            converged: failure.is_none(),
            iterations,
            residual_history: self.residuals,
            step_history: self.steps,
            lambda_history: self.lambdas,
            failure,
        }
    }
}

/// Newton-Raphson on the joint system `L = 0, C = 0`. Iterates may leave the
/// constraint set; no retraction is applied.
pub fn newton_raphson<G, C>(g: &G, c: &C, x0: &[f64], lambda0: &[f64], cfg: &SolverConfig) -> Result<SolveResult, SolverError>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    joint_newton(g, c, x0, lambda0, cfg, false)
}

/// Chebyshev iteration on the joint system: the Newton step plus the
/// second-order correction `-½ J⁻¹ J²[(η, δ)²]`, applied when `‖η‖` is at
/// most the configured cap.
pub fn chebyshev<G, C>(g: &G, c: &C, x0: &[f64], lambda0: &[f64], cfg: &SolverConfig) -> Result<SolveResult, SolverError>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    let zeros = vec![0.0; g.dim()];
    if !g.supports_second_order() || c.second(x0, &zeros).is_none() {
        return Err(SolverError::MissingCapability);
    }
    joint_newton(g, c, x0, lambda0, cfg, true)
}

fn joint_newton<G, C>(
    g: &G,
    c: &C,
    x0: &[f64],
    lambda0: &[f64],
    cfg: &SolverConfig,
    second_order: bool,
) -> Result<SolveResult, SolverError>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    check_start(g, x0)?;
    let mut x = x0.to_vec();
    let mut lambda = lambda0.to_vec();
    let mut hist = History::new();
    let mut step_norm = 0.0;
    for i in 0.. {
        let l = g.residual(&x, &lambda);
        let cval = c.value(&x);
        let r = joint_residual(&l, &cval);
        hist.residuals.push(r);
        hist.lambdas.push(lambda.clone());
        match terminal(&IterationState { iteration: i, residual: r, step_norm }, cfg) {
            Decision::Success => return Ok(hist.finish(x, lambda, i, None)),
            Decision::Failure(f) => return Ok(hist.finish(x, lambda, i, Some(f))),
            Decision::Continue => {}
        }
        let step = match schur_with_offset(g, c, &x, &lambda, Some(&cval)) {
            Ok(s) => s,
            Err(f) => return Ok(hist.finish(x, lambda, i, Some(f))),
        };
        // θ solves jC ζ θ = jC ξ - C, so jC η = -C and θ is the full multiplier update
        let mut eta = step.eta.clone();
        let mut delta = step.theta.clone();
        if second_order && norm(&eta) <= cfg.chebyshev_step_cap {
            match chebyshev_correction(g, c, &x, &lambda, &eta, &delta, &step) {
                Ok((e2, d2)) => {
                    for (a, b) in eta.iter_mut().zip(&e2) {
                        *a -= 0.5 * b;
                    }
                    for (a, b) in delta.iter_mut().zip(&d2) {
                        *a -= 0.5 * b;
                    }
                }
                Err(f) => return Ok(hist.finish(x, lambda, i, Some(f))),
            }
        }
        step_norm = norm(&eta);
        hist.steps.push(step_norm);
        if !(step_norm <= cfg.max_step_norm) {
            return Ok(hist.finish(x, lambda, i, Some(FailureReason::Diverged)));
        }
        x = add(&x, &eta);
        lambda = add(&lambda, &delta);
    }
    unreachable!("loop exits through terminal")
}

/// Solves the joint Jacobian system against `(l₂, c₂)`, the second-order
/// terms along the Newton step.
fn chebyshev_correction<G, C>(
    g: &G,
    c: &C,
    x: &[f64],
    lambda: &[f64],
    eta: &[f64],
    delta: &[f64],
    step: &SchurStep,
) -> Result<(Vec<f64>, Vec<f64>), FailureReason>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    let l2 = g.second_order(x, lambda, eta, delta).ok_or(FailureReason::SingularLx)?;
    let c2 = c.second(x, eta).ok_or(FailureReason::SingularLx)?;
    let w = g
        .solve_lx(x, lambda, &Mat::column_vector(&l2))
        .map_err(|_| FailureReason::SingularLx)?
        .column(0);
    let jw = c.jacobian(x).mul_vec(&w);
    let rhs: Vec<f64> = c2.iter().zip(&jw).map(|(a, b)| a - b).collect();
    let delta2 = Lu::factor(&step.jc_zeta)
        .and_then(|lu| lu.solve(&rhs))
        .map_err(|_| FailureReason::SingularSchur)?;
    let eta2 = add(&w, &step.zeta.mul_vec(&delta2));
    Ok((eta2, delta2))
}

/// Variants of the Rayleigh quotient iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayleighMethod {
    /// Ambient-space solve through `ζ` and `ξ`.
    Schur,
    /// Projected solve on tangent bases.
    Tangent,
    /// Schur step plus the second-order Rayleigh-Chebyshev correction.
    RayleighChebyshev,
}

/// Rayleigh quotient iteration in Schur form.
pub fn rqi_schur<G, C>(g: &G, c: &C, x0: &[f64], cfg: &SolverConfig) -> Result<SolveResult, SolverError>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    rayleigh_iteration(g, c, x0, None, cfg, RayleighMethod::Schur, &mut |_| {})
}

/// Rayleigh quotient iteration in tangent form.
pub fn rqi_tangent<G, C>(g: &G, c: &C, x0: &[f64], cfg: &SolverConfig) -> Result<SolveResult, SolverError>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    rayleigh_iteration(g, c, x0, None, cfg, RayleighMethod::Tangent, &mut |_| {})
}

/// Rayleigh-Chebyshev iteration in Schur form.
pub fn rayleigh_chebyshev_schur<G, C>(g: &G, c: &C, x0: &[f64], cfg: &SolverConfig) -> Result<SolveResult, SolverError>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    rayleigh_iteration(g, c, x0, None, cfg, RayleighMethod::RayleighChebyshev, &mut |_| {})
}

/// Shared driver for the Rayleigh family. `x0` must be feasible. The
/// multiplier is recomputed as `R(x)` at every iterate; `hint` seeds the
/// first implicit Rayleigh solve. `observer` sees every step taken.
pub fn rayleigh_iteration<G, C>(
    g: &G,
    c: &C,
    x0: &[f64],
    hint: Option<&[f64]>,
    cfg: &SolverConfig,
    method: RayleighMethod,
    observer: &mut dyn FnMut(&StepRecord<'_>),
) -> Result<SolveResult, SolverError>
where
    G: GeneralLagrangian + ?Sized,
    C: Constraint + ?Sized,
{
    check_start(g, x0)?;
    if method == RayleighMethod::RayleighChebyshev && !g.supports_second_order() {
        return Err(SolverError::MissingCapability);
    }
    let mut x = x0.to_vec();
    let mut guess: Option<Vec<f64>> = hint.map(|h| h.to_vec());
    let mut hist = History::new();
    let mut step_norm = 0.0;
    for i in 0.. {
        let lambda = match g.rayleigh(&x, guess.as_deref()) {
            Ok(l) => l,
            Err(_) => {
                let last = guess.unwrap_or_default();
                return Ok(hist.finish(x, last, i, Some(FailureReason::RayleighFailed)));
            }
        };
        let r = norm(&g.residual(&x, &lambda));
        hist.residuals.push(r);
        hist.lambdas.push(lambda.clone());
        match terminal(&IterationState { iteration: i, residual: r, step_norm }, cfg) {
            Decision::Success => return Ok(hist.finish(x, lambda, i, None)),
            Decision::Failure(f) => return Ok(hist.finish(x, lambda, i, Some(f))),
            Decision::Continue => {}
        }
        let eta = match method {
            RayleighMethod::Schur => schur_step(g, c, &x, &lambda).map(|s| s.eta),
            RayleighMethod::Tangent => tangent_step(g, c, &x, &lambda),
            RayleighMethod::RayleighChebyshev => schur_step(g, c, &x, &lambda).and_then(|s| {
                if norm(&s.eta) <= cfg.chebyshev_step_cap {
                    rayleigh_chebyshev_correction(g, c, &x, &lambda, &s)
                } else {
                    Ok(s.eta)
                }
            }),
        };
        let eta = match eta {
            Ok(e) => e,
            Err(f) => return Ok(hist.finish(x, lambda, i, Some(f))),
        };
        step_norm = norm(&eta);
        hist.steps.push(step_norm);
        if !(step_norm <= cfg.max_step_norm) {
            return Ok(hist.finish(x, lambda, i, Some(FailureReason::Diverged)));
        }
        let next = match c.retract(&x, &eta) {
            Ok(n) => n,
            Err(_) => return Ok(hist.finish(x, lambda, i, Some(FailureReason::DegenerateRetraction))),
        };
        observer(&StepRecord { iteration: i, x: &x, lambda: &lambda, eta: &eta, x_next: &next, residual: r });
        x = next;
        guess = Some(lambda);
    }
    unreachable!("loop exits through terminal")
}

/// Residuals at or below this value are excluded from order estimates.
pub const ORDER_FLOOR: f64 = 1e-14;
/// Number of trailing residuals used by [`convergence_order`].
pub const ORDER_WINDOW: usize = 3;

/// Empirical convergence order: least-squares slope of `log r_{k+1}` against
/// `log r_k` over the last [`ORDER_WINDOW`] residuals of the strictly
/// decreasing tail above [`ORDER_FLOOR`].
pub fn convergence_order(residuals: &[f64]) -> Result<f64, SolverError> {
    let above: Vec<f64> = residuals.iter().copied().take_while(|&r| r > ORDER_FLOOR).collect();
    let mut start = above.len();
    while start > 0 && (start == above.len() || above[start - 1] > above[start]) {
        start -= 1;
    }
    let tail = &above[start..];
    if tail.len() < ORDER_WINDOW {
        return Err(SolverError::InsufficientHistory { available: tail.len(), required: ORDER_WINDOW });
    }
    let window = &tail[tail.len() - ORDER_WINDOW..];
    let logs: Vec<f64> = window.iter().map(|r| libm::log(*r)).collect();
    let xs = &logs[..logs.len() - 1];
    let ys = &logs[1..];
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec;

    #[test]
    fn terminal_decisions() {
        let cfg = SolverConfig::default();
        let st = |iteration, residual, step_norm| IterationState { iteration, residual, step_norm };
        assert_eq!(terminal(&st(3, 1e-13, 0.1), &cfg), Decision::Success);
        assert_eq!(terminal(&st(100, 1e-3, 0.1), &cfg), Decision::Failure(FailureReason::MaxIter));
        assert_eq!(terminal(&st(4, 1e-3, 1e9), &cfg), Decision::Failure(FailureReason::Diverged));
        assert_eq!(terminal(&st(4, 1e-3, 0.1), &cfg), Decision::Continue);
    }

    #[test]
    fn order_of_synthetic_sequences() {
        let quad: Vec<f64> = (0..6).map(|k| libm::pow(0.1, libm::pow(2.0, k as f64))).collect();
        assert!((convergence_order(&quad).unwrap() - 2.0).abs() < 0.1);
        let cubic: Vec<f64> = (0..5).map(|k| libm::pow(0.1, libm::pow(3.0, k as f64))).collect();
        assert!((convergence_order(&cubic).unwrap() - 3.0).abs() < 0.15);
    }

    #[test]
    fn order_needs_history() {
        assert!(matches!(
            convergence_order(&[1e-1, 1e-3, 1e-20]),
            Err(SolverError::InsufficientHistory { available: 2, .. })
        ));
        // non-monotone prefix is ignored
        let r = vec![1e-1, 1e-2, 5e-1, 1e-2, 1e-4, 1e-8];
        assert!((convergence_order(&r).unwrap() - 2.0).abs() < 1e-12);
    }
}
