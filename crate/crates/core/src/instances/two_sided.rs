//! Two-sided eigenproblem for a complex matrix on stacked `w = (u; v)`.
//!
//! `F(w) = (A* v; A u)`, `H(w) λ = (v λ̄; u λ)`, both blocks of unit norm.
//! The Rayleigh quotient `v*Au / v*u` comes from the dagger `(a, b) ↦ v* b`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{InstanceError, LinalgError, ModelError, RetractionError};
use crate::linalg::{complexify_vector, dotc, normalized, realify_matrix, realify_vector, Lu, Mat, Scalar};
use crate::model::{Constraint, ExplicitLagrangian, ExplicitProblem, LeftInverse, RetractionOrder};
use crate::retraction::DEGENERATE_NORM;

/// Smallest `|v*u|` accepted by the Rayleigh quotient.
pub const BIORTHOGONALITY_TOL: f64 = 1e-12;

/// Splits a realified stacked vector into its complex blocks.
pub fn split_blocks(x: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let w = complexify_vector(x);
    let n = w.len() / 2;
    (w[..n].to_vec(), w[n..].to_vec())
}

/// Realifies the stacked vector `(u; v)`.
pub fn join_blocks(u: &[Complex64], v: &[Complex64]) -> Vec<f64> {
    let mut w = u.to_vec();
    w.extend_from_slice(v);
    realify_vector(&w)
}

/// `[[0, B],[C, 0]]`.
pub(crate) fn antidiagonal(b: &Mat<Complex64>, c: &Mat<Complex64>) -> Mat<Complex64> {
    let n = b.rows();
    Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => b[(i, j - n)],
        (false, true) => c[(i - n, j)],
        _ => Complex64::new(0.0, 0.0),
    })
}

/// Solves `[[0, B],[C, 0]] (a; b) = (r; s)` blockwise: `C a = s`, `B b = r`.
pub(crate) fn solve_antidiagonal(b_lu: &Lu<Complex64>, c_lu: &Lu<Complex64>, rhs: &Mat) -> Result<Mat, LinalgError> {
    let n = b_lu.dim();
    let cols = rhs
        .columns()
        .iter()
        .map(|col| {
            let w = complexify_vector(col);
            let a = c_lu.solve(&w[n..])?;
            let b = b_lu.solve(&w[..n])?;
            Ok(join_blocks(&a, &b))
        })
        .collect::<Result<Vec<_>, LinalgError>>()?;
    Ok(Mat::from_columns(rhs.rows(), &cols))
}

/// `H(w)` columns `(v; u)` and `(-i v; i u)` in split layout.
pub(crate) fn stacked_h(u: &[Complex64], v: &[Complex64]) -> Mat {
    let i = Complex64::new(0.0, 1.0);
    let re = join_blocks(v, u);
    let vi: Vec<Complex64> = v.iter().map(|z| -i * z).collect();
    let ui: Vec<Complex64> = u.iter().map(|z| i * z).collect();
    let im = join_blocks(&vi, &ui);
    Mat::from_columns(re.len(), &[re, im])
}

/// Realified dagger `(a, b) ↦ v* b` as a `2 × 4n` matrix.
pub(crate) fn v_dagger(v: &[Complex64]) -> Mat {
    let n = v.len();
    Mat::from_fn(2, 4 * n, |r, j| {
        let (block, k) = (j / n, j % n);
        match (r, block) {
            (0, 1) => v[k].re,
            (0, 3) => v[k].im,
            (1, 1) => -v[k].im,
            (1, 3) => v[k].re,
            _ => 0.0,
        }
    })
}

#[derive(Clone, Debug)]
pub struct TwoSidedMatrix {
    a: Mat<Complex64>,
    a_adj: Mat<Complex64>,
}

impl TwoSidedMatrix {
    pub fn new(a: Mat<Complex64>) -> Result<Self, InstanceError> {
        if !a.is_square() {
            return Err(InstanceError::Invalid("matrix must be square"));
        }
        let a_adj = a.adjoint();
        Ok(TwoSidedMatrix { a, a_adj })
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.a
    }

    fn n(&self) -> usize {
        self.a.rows()
    }

    fn shifted(&self, lambda: &[f64]) -> (Mat<Complex64>, Mat<Complex64>) {
        let l = Complex64::new(lambda[0], lambda[1]);
        let mut p = self.a.clone();
        let mut q = self.a_adj.clone();
        for i in 0..self.n() {
            p[(i, i)] -= l;
            q[(i, i)] -= l.conj();
        }
        (q, p)
    }
}

impl ExplicitLagrangian for TwoSidedMatrix {
    fn dim(&self) -> usize {
        4 * self.n()
    }
    fn dim_lambda(&self) -> usize {
        2
    }
    fn f(&self, x: &[f64]) -> Vec<f64> {
        let (u, v) = split_blocks(x);
        join_blocks(&self.a_adj.mul_vec(&v), &self.a.mul_vec(&u))
    }
    fn h(&self, x: &[f64]) -> Mat {
        let (u, v) = split_blocks(x);
        stacked_h(&u, &v)
    }
    fn jf(&self, _x: &[f64]) -> Mat {
        realify_matrix(&antidiagonal(&self.a_adj, &self.a))
    }
    fn jh(&self, _x: &[f64], eta: &[f64]) -> Mat {
        let (eu, ev) = split_blocks(eta);
        stacked_h(&eu, &ev)
    }
    fn j2f(&self, x: &[f64], _eta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; x.len()])
    }
    fn j2h(&self, x: &[f64], _eta: &[f64]) -> Option<Mat> {
        Some(Mat::zeros(x.len(), 2))
    }
    fn has_second_derivatives(&self) -> bool {
        true
    }
    fn validate(&self, x: &[f64]) -> Result<(), ModelError> {
        let (u, v) = split_blocks(x);
        let value = dotc(&v, &u).modulus();
        if !(value >= BIORTHOGONALITY_TOL) {
            return Err(ModelError::Biorthogonality { value });
        }
        Ok(())
    }
    fn lx(&self, _x: &[f64], lambda: &[f64]) -> Mat {
        let (q, p) = self.shifted(lambda);
        realify_matrix(&antidiagonal(&q, &p))
    }
    fn solve_lx(&self, _x: &[f64], lambda: &[f64], rhs: &Mat) -> Result<Mat, LinalgError> {
        let (q, p) = self.shifted(lambda);
        solve_antidiagonal(&Lu::factor(&q)?, &Lu::factor(&p)?, rhs)
    }
}

/// Dagger `(a, b) ↦ v* b`.
#[derive(Clone, Copy, Debug, Default)]
pub struct VDagger;

impl<L: ExplicitLagrangian + ?Sized> LeftInverse<L> for VDagger {
    fn dagger(&self, _lag: &L, x: &[f64]) -> Mat {
        v_dagger(&split_blocks(x).1)
    }
    fn dagger_derivative(&self, _lag: &L, _x: &[f64], eta: &[f64]) -> Mat {
        v_dagger(&split_blocks(eta).1)
    }
}

/// `(½(|u|² - 1), ½(|v|² - 1))` on split-layout stacked vectors, retracted
/// by normalizing each block.
#[derive(Clone, Copy, Debug)]
pub struct TwoSidedNorms {
    pub n: usize,
}

impl TwoSidedNorms {
    fn in_u(&self, j: usize) -> bool {
        (j / self.n).is_multiple_of(2)
    }
}

impl Constraint for TwoSidedNorms {
    fn dim(&self) -> usize {
        4 * self.n
    }
    fn count(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> Vec<f64> {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, v) in x.iter().enumerate() {
            if self.in_u(j) {
                a += v * v;
            } else {
                b += v * v;
            }
        }
        vec![0.5 * (a - 1.0), 0.5 * (b - 1.0)]
    }
    fn jacobian(&self, x: &[f64]) -> Mat {
        Mat::from_fn(2, x.len(), |r, j| if self.in_u(j) == (r == 0) { x[j] } else { 0.0 })
    }
    fn second(&self, _x: &[f64], eta: &[f64]) -> Option<Vec<f64>> {
        let mut out = vec![0.0; 2];
        for (j, v) in eta.iter().enumerate() {
            out[if self.in_u(j) { 0 } else { 1 }] += v * v;
        }
        Some(out)
    }
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        let y: Vec<f64> = x.iter().zip(eta).map(|(a, b)| a + b).collect();
        let (u, v) = split_blocks(&y);
        let (a, b) = (crate::linalg::norm(&u), crate::linalg::norm(&v));
        if !(a >= DEGENERATE_NORM && b >= DEGENERATE_NORM) {
            return Err(RetractionError::DegenerateStep { norm: a.min(b) });
        }
        let su: Vec<Complex64> = u.iter().map(|z| z / a).collect();
        let sv: Vec<Complex64> = v.iter().map(|z| z / b).collect();
        Ok(join_blocks(&su, &sv))
    }
    fn retraction_order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

pub type TwoSidedProblem = ExplicitProblem<TwoSidedMatrix, VDagger, VDagger>;

/// Two-sided eigenproblem for `A`.
pub fn build_two_sided(a: Mat<Complex64>) -> Result<(TwoSidedProblem, TwoSidedNorms), InstanceError> {
    let lag = TwoSidedMatrix::new(a)?;
    let n = lag.n();
    Ok((ExplicitProblem::with_dagger(lag, VDagger), TwoSidedNorms { n }))
}

/// Feasible start `(u0; v0)` from two complex vectors.
pub fn two_sided_start(u: &[Complex64], v: &[Complex64]) -> Option<Vec<f64>> {
    Some(join_blocks(&normalized(u)?, &normalized(v)?))
}

/// Complexifies a real matrix.
pub fn complex_matrix(a: &Mat) -> Mat<Complex64> {
    Mat::from_fn(a.rows(), a.cols(), |i, j| Complex64::new(a[(i, j)], 0.0))
}
