//! Vector Lagrangian on a graph constraint: the last two coordinates are
//! functions of the first `n_f`,
//! `x[n_f] = Σ (y + sin y)`, `x[n_f + 1] = Σ (y + cos y)` with `y = x[..n_f]`.

use alloc::vec;
use alloc::vec::Vec;

use libm::{cos, sin};

use crate::error::{InstanceError, RetractionError};
use crate::linalg::{add, sub, Mat};
use crate::model::{Constraint, ExplicitLagrangian, ExplicitProblem, RetractionOrder};
use crate::retraction::{orthographic_graph_retract, SolvedForm};
use crate::rng::{normal_mat, normal_vec, seeded};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FKind {
    Linear,
    Sine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HKind {
    Constant,
    Quadratic,
}

/// `F(x) = A x + offset (+ sin(B x))`, `H(x) = H0 (+ diag(x²) W)`.
#[derive(Clone, Debug)]
pub struct GraphLagrangian {
    a: Mat,
    b: Option<Mat>,
    h0: Mat,
    w: Option<Mat>,
    offset: Vec<f64>,
}

impl GraphLagrangian {
    fn sine_part(&self, x: &[f64]) -> Option<(Mat, Vec<f64>)> {
        self.b.as_ref().map(|b| (b.clone(), b.mul_vec(x)))
    }
}

impl ExplicitLagrangian for GraphLagrangian {
    fn dim(&self) -> usize {
        self.a.rows()
    }
    fn dim_lambda(&self) -> usize {
        2
    }
    fn f(&self, x: &[f64]) -> Vec<f64> {
        let mut out = add(&self.a.mul_vec(x), &self.offset);
        if let Some((_, bx)) = self.sine_part(x) {
            out.iter_mut().zip(&bx).for_each(|(o, t)| *o += sin(*t));
        }
        out
    }
    fn h(&self, x: &[f64]) -> Mat {
        match &self.w {
            None => self.h0.clone(),
            Some(w) => Mat::from_fn(x.len(), 2, |j, k| self.h0[(j, k)] + x[j] * x[j] * w[(j, k)]),
        }
    }
    fn jf(&self, x: &[f64]) -> Mat {
        match self.sine_part(x) {
            None => self.a.clone(),
            Some((b, bx)) => Mat::from_fn(x.len(), x.len(), |i, j| self.a[(i, j)] + cos(bx[i]) * b[(i, j)]),
        }
    }
    fn jh(&self, x: &[f64], eta: &[f64]) -> Mat {
        match &self.w {
            None => Mat::zeros(x.len(), 2),
            Some(w) => Mat::from_fn(x.len(), 2, |j, k| 2.0 * x[j] * eta[j] * w[(j, k)]),
        }
    }
    fn j2f(&self, x: &[f64], eta: &[f64]) -> Option<Vec<f64>> {
        Some(match self.sine_part(x) {
            None => vec![0.0; x.len()],
            Some((b, bx)) => {
                let be = b.mul_vec(eta);
                bx.iter().zip(&be).map(|(t, d)| -sin(*t) * d * d).collect()
            }
        })
    }
    fn j2h(&self, x: &[f64], eta: &[f64]) -> Option<Mat> {
        Some(match &self.w {
            None => Mat::zeros(x.len(), 2),
            Some(w) => Mat::from_fn(x.len(), 2, |j, k| 2.0 * eta[j] * eta[j] * w[(j, k)]),
        })
    }
    fn has_second_derivatives(&self) -> bool {
        true
    }
}

/// Two dependent coordinates appended to `free` free ones.
#[derive(Clone, Copy, Debug)]
pub struct GraphConstraint {
    pub free: usize,
}

impl SolvedForm for GraphConstraint {
    fn free_dim(&self) -> usize {
        self.free
    }
    fn dependent(&self, y: &[f64]) -> Vec<f64> {
        vec![y.iter().map(|t| t + sin(*t)).sum(), y.iter().map(|t| t + cos(*t)).sum()]
    }
}

impl Constraint for GraphConstraint {
    fn dim(&self) -> usize {
        self.free + 2
    }
    fn count(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> Vec<f64> {
        sub(&x[self.free..], &self.dependent(&x[..self.free]))
    }
    fn jacobian(&self, x: &[f64]) -> Mat {
        let k = self.free;
        let mut j = Mat::zeros(2, k + 2);
        for (i, y) in x[..k].iter().enumerate() {
            j[(0, i)] = -(1.0 + cos(*y));
            j[(1, i)] = -(1.0 - sin(*y));
        }
        j[(0, k)] = 1.0;
        j[(1, k + 1)] = 1.0;
        j
    }
    fn second(&self, x: &[f64], eta: &[f64]) -> Option<Vec<f64>> {
        let k = self.free;
        let (mut s, mut c) = (0.0, 0.0);
        for (y, e) in x[..k].iter().zip(&eta[..k]) {
            s += sin(*y) * e * e;
            c += cos(*y) * e * e;
        }
        Some(vec![s, c])
    }
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        Ok(orthographic_graph_retract(x, eta, self))
    }
    fn retraction_order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

pub type GraphProblem = ExplicitProblem<GraphLagrangian>;

/// A random instance together with a known solution `(x*, λ*)`.
#[derive(Clone, Debug)]
pub struct GraphInstance {
    pub problem: GraphProblem,
    pub constraint: GraphConstraint,
    pub solution: Vec<f64>,
    pub multiplier: Vec<f64>,
}

impl GraphInstance {
    /// Feasible start: the solution with its free block moved by `scale`
    /// times a Gaussian vector, then retracted.
    pub fn perturbed_start(&self, scale: f64, seed: u64) -> Vec<f64> {
        let n = self.constraint.dim();
        let mut d = normal_vec(&mut seeded(seed), n);
        d.iter_mut().for_each(|v| *v *= scale);
        orthographic_graph_retract(&self.solution, &d, &self.constraint)
    }
}

/// Random `A`, `B` (scaled by `1/sqrt(n)`), `H0`, `W`, and a feasible `x*`
/// with multipliers `λ*`; the offset makes `(x*, λ*)` a solution.
pub fn build_graph(n_f: usize, f_kind: FKind, h_kind: HKind, seed: u64) -> Result<GraphInstance, InstanceError> {
    if n_f == 0 {
        return Err(InstanceError::Invalid("need at least one free coordinate"));
    }
    let n = n_f + 2;
    let mut rng = seeded(seed);
    let s = 1.0 / libm::sqrt(n as f64);
    let a = normal_mat(&mut rng, n, n).scale(s);
    let b = normal_mat(&mut rng, n, n).scale(s);
    let h0 = normal_mat(&mut rng, n, 2);
    let w = normal_mat(&mut rng, n, 2).scale(0.5);
    let constraint = GraphConstraint { free: n_f };
    let free: Vec<f64> = normal_vec(&mut rng, n_f).iter().map(|v| 0.5 * v).collect();
    let mut solution = free.clone();
    solution.extend(constraint.dependent(&free));
    let multiplier = normal_vec(&mut rng, 2);
    let mut lag = GraphLagrangian {
        a,
        b: (f_kind == FKind::Sine).then_some(b),
        h0,
        w: (h_kind == HKind::Quadratic).then_some(w),
        offset: vec![0.0; n],
    };
    let hl = lag.h(&solution).mul_vec(&multiplier);
    lag.offset = sub(&hl, &lag.f(&solution));
    Ok(GraphInstance { problem: ExplicitProblem::gram(lag), constraint, solution, multiplier })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::model::{fd_check_constraint, fd_check_explicit, Derivative};
    use crate::solver::{convergence_order, newton_raphson, rqi_schur, SolverConfig};

    const KINDS: [(FKind, HKind); 4] = [
        (FKind::Linear, HKind::Constant),
        (FKind::Linear, HKind::Quadratic),
        (FKind::Sine, HKind::Constant),
        (FKind::Sine, HKind::Quadratic),
    ];

    #[test]
    fn derivatives_match_fd() {
        for (k, (f, h)) in KINDS.into_iter().enumerate() {
            let g = build_graph(4, f, h, 10 + k as u64).unwrap();
            let x = g.perturbed_start(0.3, 1);
            let d = normal_vec(&mut seeded(2), 6);
            for w in [Derivative::JF, Derivative::JH, Derivative::J2F, Derivative::J2H] {
                assert!(fd_check_explicit(&g.problem.lagrangian, &x, &[0.4, -0.7], &d, w).unwrap() < 1e-6, "{w:?}");
            }
            assert!(fd_check_constraint(&g.constraint, &x, &d, Derivative::JC).unwrap() < 1e-6);
            assert!(fd_check_constraint(&g.constraint, &x, &d, Derivative::J2C).unwrap() < 1e-6);
        }
    }

    #[test]
    fn known_solution_solves_system() {
        for (f, h) in KINDS {
            let g = build_graph(5, f, h, 3).unwrap();
            let lag = &g.problem.lagrangian;
            let l = sub(&lag.f(&g.solution), &lag.h(&g.solution).mul_vec(&g.multiplier));
            assert!(norm(&l) < 1e-12);
            assert!(norm(&g.constraint.value(&g.solution)) < 1e-12);
        }
    }

    #[test]
    fn retraction_stays_feasible() {
        let g = build_graph(6, FKind::Sine, HKind::Quadratic, 4).unwrap();
        let x = g.perturbed_start(0.5, 5);
        assert!(norm(&g.constraint.value(&x)) < 1e-12);
        let y = g.constraint.retract(&x, &normal_vec(&mut seeded(6), 8)).unwrap();
        assert!(norm(&g.constraint.value(&y)) < 1e-12);
    }

    #[test]
    fn linear_constant_newton_is_quadratic() {
        let g = build_graph(6, FKind::Linear, HKind::Constant, 7).unwrap();
        let x0 = g.perturbed_start(0.05, 8);
        let l0: Vec<f64> = g.multiplier.iter().map(|v| v + 0.05).collect();
        let r = newton_raphson(&g.problem, &g.constraint, &x0, &l0, &SolverConfig::default()).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(convergence_order(&r.residual_history).unwrap() >= 1.8);
    }

    #[test]
    fn all_combinations_run() {
        for (k, (f, h)) in KINDS.into_iter().enumerate() {
            let g = build_graph(5, f, h, 20 + k as u64).unwrap();
            let x0 = g.perturbed_start(0.02, 9);
            let r = rqi_schur(&g.problem, &g.constraint, &x0, &SolverConfig::default()).unwrap();
            assert!(r.converged, "{f:?} {h:?}: {r:?}");
            assert!(norm(&sub(&r.x, &g.solution)) < 1e-8);
        }
    }
}
