//! Polynomial eigenproblems `P(λ) z = 0` with the implicit Rayleigh quotient
//! `z* P(λ) z = 0`, one-sided and two-sided.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::constraints::{AffineConstraint, GaugedComplexSphere};
use crate::error::{InstanceError, LinalgError, ModelError, RetractionError};
use crate::linalg::{complexify_vector, dotc, realify_matrix, realify_vector, Lu, Mat};
use crate::model::{gram_left_inverse, rayleigh_implicit, Constraint, GeneralLagrangian, RetractionOrder};
use crate::rng::complex_normal_mat;

use super::two_sided::{antidiagonal, join_blocks, solve_antidiagonal, split_blocks, v_dagger, BIORTHOGONALITY_TOL};

/// `P(λ) = Σ λ^k A_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialMatrix {
    coefficients: Vec<Mat<Complex64>>,
}

impl PolynomialMatrix {
    pub fn new(coefficients: Vec<Mat<Complex64>>) -> Result<Self, InstanceError> {
        let first = coefficients.first().ok_or(InstanceError::Invalid("polynomial needs coefficients"))?;
        if coefficients.len() < 2 {
            return Err(InstanceError::Invalid("polynomial degree must be at least 1"));
        }
        let n = first.rows();
        for c in &coefficients {
            if c.rows() != n || c.cols() != n {
                return Err(InstanceError::DimensionMismatch { expected: n, actual: c.rows().max(c.cols()) });
            }
        }
        Ok(PolynomialMatrix { coefficients })
    }

    /// Random coefficients with complex normal entries scaled by `1/sqrt(n)`.
    pub fn random(n: usize, degree: usize, seed: u64) -> Result<Self, InstanceError> {
        let mut rng = crate::rng::seeded(seed);
        let s = Complex64::new(1.0 / libm::sqrt(n as f64), 0.0);
        Self::new((0..=degree).map(|_| complex_normal_mat(&mut rng, n, n).scale(s)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coefficients[0].rows()
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Mat<Complex64>] {
        &self.coefficients
    }

    /// `Σ c_k(λ) A_k` with Horner-free power weights `c_k`.
    fn weighted(&self, weights: impl Fn(usize) -> Complex64) -> Mat<Complex64> {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        for (k, a) in self.coefficients.iter().enumerate() {
            let w = weights(k);
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            out = out.add(&a.scale(w));
        }
        out
    }

    pub fn evaluate(&self, lambda: Complex64) -> Mat<Complex64> {
        self.weighted(|k| lambda.powi(k as i32))
    }

    /// `P'(λ)`.
    pub fn derivative(&self, lambda: Complex64) -> Mat<Complex64> {
        self.weighted(|k| if k == 0 { Complex64::new(0.0, 0.0) } else { lambda.powi(k as i32 - 1) * k as f64 })
    }

    /// `P''(λ)`.
    pub fn second_derivative(&self, lambda: Complex64) -> Mat<Complex64> {
        self.weighted(|k| {
            if k < 2 {
                Complex64::new(0.0, 0.0)
            } else {
                lambda.powi(k as i32 - 2) * (k * (k - 1)) as f64
            }
        })
    }

    /// `A - λ I` as a degree-one polynomial.
    pub fn linear_pencil(a: Mat<Complex64>) -> Result<Self, InstanceError> {
        let n = a.rows();
        let minus_i = Mat::identity(n).scale(Complex64::new(-1.0, 0.0));
        Self::new(vec![a, minus_i])
    }
}

fn lam(l: &[f64]) -> Complex64 {
    Complex64::new(l[0], l[1])
}

/// `2 × 2` real matrix of multiplication by `a`.
fn complex_scalar_matrix(a: Complex64) -> Mat {
    Mat::from_row_major(2, 2, vec![a.re, -a.im, a.im, a.re]).expect("2x2")
}

/// Realified dagger `w ↦ z* w`.
fn z_dagger(z: &[Complex64]) -> Mat {
    let n = z.len();
    Mat::from_fn(2, 2 * n, |r, j| {
        let (imag, k) = (j >= n, j % n);
        match (r, imag) {
            (0, false) => z[k].re,
            (0, true) => z[k].im,
            (_, false) => -z[k].im,
            (_, true) => z[k].re,
        }
    })
}

/// One-sided polynomial eigenproblem in split layout, `λ` complex.
#[derive(Clone, Debug)]
pub struct Nlep {
    poly: PolynomialMatrix,
    /// Seed of the first implicit Rayleigh solve.
    pub initial_guess: Complex64,
}

impl Nlep {
    pub fn new(poly: PolynomialMatrix) -> Self {
        Nlep { poly, initial_guess: Complex64::new(0.0, 0.0) }
    }

    pub fn polynomial(&self) -> &PolynomialMatrix {
        &self.poly
    }

    fn n_x(&self, x: &[f64], l: &[f64]) -> Mat {
        let z = complexify_vector(x);
        let p = self.poly.evaluate(lam(l));
        let a = p.adjoint().mul_vec(&z);
        let b = p.mul_vec(&z);
        let i = Complex64::new(0.0, 1.0);
        let n = z.len();
        let grad: Vec<Complex64> = (0..2 * n)
            .map(|j| if j < n { a[j].conj() + b[j] } else { i * a[j - n].conj() - i * b[j - n] })
            .collect();
        Mat::from_fn(2, 2 * n, |r, j| if r == 0 { grad[j].re } else { grad[j].im })
    }
}

impl GeneralLagrangian for Nlep {
    fn dim(&self) -> usize {
        2 * self.poly.dim()
    }
    fn dim_lambda(&self) -> usize {
        2
    }
    fn residual(&self, x: &[f64], l: &[f64]) -> Vec<f64> {
        realify_vector(&self.poly.evaluate(lam(l)).mul_vec(&complexify_vector(x)))
    }
    fn lx(&self, _x: &[f64], l: &[f64]) -> Mat {
        realify_matrix(&self.poly.evaluate(lam(l)))
    }
    fn llambda(&self, x: &[f64], l: &[f64]) -> Mat {
        let z = complexify_vector(x);
        let dz = self.poly.derivative(lam(l)).mul_vec(&z);
        let i = Complex64::new(0.0, 1.0);
        let idz: Vec<Complex64> = dz.iter().map(|v| i * v).collect();
        Mat::from_columns(x.len(), &[realify_vector(&dz), realify_vector(&idz)])
    }
    fn solve_lx(&self, _x: &[f64], l: &[f64], rhs: &Mat) -> Result<Mat, LinalgError> {
        let lu = Lu::factor(&self.poly.evaluate(lam(l)))?;
        let cols = rhs
            .columns()
            .iter()
            .map(|c| lu.solve(&complexify_vector(c)).map(|s| realify_vector(&s)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Mat::from_columns(rhs.rows(), &cols))
    }
    fn residual_preimage(&self, x: &[f64], _l: &[f64]) -> Option<Vec<f64>> {
        Some(x.to_vec())
    }
    fn second_order(&self, x: &[f64], l: &[f64], eta: &[f64], delta: &[f64]) -> Option<Vec<f64>> {
        let z = complexify_vector(x);
        let e = complexify_vector(eta);
        let d = lam(delta);
        let a = self.poly.derivative(lam(l)).mul_vec(&e);
        let b = self.poly.second_derivative(lam(l)).mul_vec(&z);
        let out: Vec<Complex64> = a.iter().zip(&b).map(|(p, q)| d * p * 2.0 + d * d * q).collect();
        Some(realify_vector(&out))
    }
    fn supports_second_order(&self) -> bool {
        true
    }
    fn rayleigh(&self, x: &[f64], hint: Option<&[f64]>) -> Result<Vec<f64>, ModelError> {
        let guess = hint.map_or([self.initial_guess.re, self.initial_guess.im], |h| [h[0], h[1]]);
        let z = complexify_vector(x);
        let n = |l: &[f64]| {
            let v = dotc(&z, &self.poly.evaluate(lam(l)).mul_vec(&z));
            vec![v.re, v.im]
        };
        let nl = |l: &[f64]| complex_scalar_matrix(dotc(&z, &self.poly.derivative(lam(l)).mul_vec(&z)));
        crate::model::implicit_root(n, nl, &guess)
    }
    fn rayleigh_jacobian(&self, x: &[f64], l: &[f64]) -> Result<Mat, ModelError> {
        let z = complexify_vector(x);
        let nl = complex_scalar_matrix(dotc(&z, &self.poly.derivative(lam(l)).mul_vec(&z)));
        Ok(Lu::factor(&nl)?.solve_mat(&self.n_x(x, l))?.scale(-1.0))
    }
    fn left_inverse(&self, x: &[f64], l: &[f64]) -> Result<Mat, ModelError> {
        let h = self.llambda(x, l).scale(-1.0);
        gram_left_inverse(&h, Some(&z_dagger(&complexify_vector(x))))
    }
}

impl Nlep {
    /// Implicit Rayleigh quotient and its Jacobian from `guess`.
    pub fn rayleigh_with_jacobian(&self, x: &[f64], guess: &[f64]) -> Result<crate::model::ImplicitRayleigh, ModelError> {
        let n = |y: &[f64], l: &[f64]| {
            let z = complexify_vector(y);
            let v = dotc(&z, &self.poly.evaluate(lam(l)).mul_vec(&z));
            vec![v.re, v.im]
        };
        let nl = |y: &[f64], l: &[f64]| {
            let z = complexify_vector(y);
            complex_scalar_matrix(dotc(&z, &self.poly.derivative(lam(l)).mul_vec(&z)))
        };
        rayleigh_implicit(n, nl, |y, l| self.n_x(y, l), x, guess)
    }
}

/// Normalization for the one-sided problem.
#[derive(Clone, Debug)]
pub enum NlepConstraint {
    /// Unit sphere with phase fixed by `Im(w*z) = 0`.
    Sphere(GaugedComplexSphere),
    /// `u*z = 1`.
    Linear(AffineConstraint),
}

impl Constraint for NlepConstraint {
    fn dim(&self) -> usize {
        match self {
            NlepConstraint::Sphere(c) => c.dim(),
            NlepConstraint::Linear(c) => c.dim(),
        }
    }
    fn count(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> Vec<f64> {
        match self {
            NlepConstraint::Sphere(c) => c.value(x),
            NlepConstraint::Linear(c) => c.value(x),
        }
    }
    fn jacobian(&self, x: &[f64]) -> Mat {
        match self {
            NlepConstraint::Sphere(c) => c.jacobian(x),
            NlepConstraint::Linear(c) => c.jacobian(x),
        }
    }
    fn second(&self, x: &[f64], eta: &[f64]) -> Option<Vec<f64>> {
        match self {
            NlepConstraint::Sphere(c) => c.second(x, eta),
            NlepConstraint::Linear(c) => c.second(x, eta),
        }
    }
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        match self {
            NlepConstraint::Sphere(c) => c.retract(x, eta),
            NlepConstraint::Linear(c) => c.retract(x, eta),
        }
    }
    fn retraction_order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlepNormalization {
    Sphere,
    Linear,
}

/// One-sided problem and a feasible start built from `z0`: the gauge (or
/// normalization) vector is `z0` itself.
pub fn build_nlep(
    poly: PolynomialMatrix,
    normalization: NlepNormalization,
    z0: &[Complex64],
) -> Result<(Nlep, NlepConstraint, Vec<f64>), InstanceError> {
    if z0.len() != poly.dim() {
        return Err(InstanceError::DimensionMismatch { expected: poly.dim(), actual: z0.len() });
    }
    let z = crate::linalg::normalized(z0).ok_or(InstanceError::Invalid("zero start vector"))?;
    let (c, x0) = match normalization {
        NlepNormalization::Sphere => (NlepConstraint::Sphere(GaugedComplexSphere::new(z.clone())), realify_vector(&z)),
        NlepNormalization::Linear => {
            let c = AffineConstraint::complex_normalizing(&z).map_err(|_| InstanceError::Invalid("zero start vector"))?;
            (NlepConstraint::Linear(c), realify_vector(&z))
        }
    };
    Ok((Nlep::new(poly), c, x0))
}

/// Two-sided polynomial eigenproblem on `w = (u; v)`:
/// `L = (P(λ)* v; P(λ) u)`, Rayleigh root of `v* P(λ) u = 0`.
#[derive(Clone, Debug)]
pub struct TwoSidedNlep {
    poly: PolynomialMatrix,
    pub initial_guess: Complex64,
}

impl TwoSidedNlep {
    pub fn new(poly: PolynomialMatrix) -> Self {
        TwoSidedNlep { poly, initial_guess: Complex64::new(0.0, 0.0) }
    }

    pub fn polynomial(&self) -> &PolynomialMatrix {
        &self.poly
    }

    fn scalar(&self, x: &[f64], l: &[f64]) -> Complex64 {
        let (u, v) = split_blocks(x);
        dotc(&v, &self.poly.evaluate(lam(l)).mul_vec(&u))
    }

    fn scalar_derivative(&self, x: &[f64], l: &[f64]) -> Complex64 {
        let (u, v) = split_blocks(x);
        dotc(&v, &self.poly.derivative(lam(l)).mul_vec(&u))
    }

    fn n_x(&self, x: &[f64], l: &[f64]) -> Mat {
        let (u, v) = split_blocks(x);
        let p = self.poly.evaluate(lam(l));
        let a = p.adjoint().mul_vec(&v);
        let b = p.mul_vec(&u);
        let i = Complex64::new(0.0, 1.0);
        let n = u.len();
        // split layout: [Re u, Re v, Im u, Im v]
        let grad: Vec<Complex64> = (0..4 * n)
            .map(|j| match (j / n, j % n) {
                (0, k) => a[k].conj(),
                (1, k) => b[k],
                (2, k) => i * a[k].conj(),
                (_, k) => -i * b[k],
            })
            .collect();
        Mat::from_fn(2, 4 * n, |r, j| if r == 0 { grad[j].re } else { grad[j].im })
    }
}

impl GeneralLagrangian for TwoSidedNlep {
    fn dim(&self) -> usize {
        4 * self.poly.dim()
    }
    fn dim_lambda(&self) -> usize {
        2
    }
    fn residual(&self, x: &[f64], l: &[f64]) -> Vec<f64> {
        let (u, v) = split_blocks(x);
        let p = self.poly.evaluate(lam(l));
        join_blocks(&p.adjoint().mul_vec(&v), &p.mul_vec(&u))
    }
    fn lx(&self, _x: &[f64], l: &[f64]) -> Mat {
        let p = self.poly.evaluate(lam(l));
        realify_matrix(&antidiagonal(&p.adjoint(), &p))
    }
    fn llambda(&self, x: &[f64], l: &[f64]) -> Mat {
        let (u, v) = split_blocks(x);
        let d = self.poly.derivative(lam(l));
        let dv = d.adjoint().mul_vec(&v);
        let du = d.mul_vec(&u);
        let i = Complex64::new(0.0, 1.0);
        let re = join_blocks(&dv, &du);
        let dvi: Vec<Complex64> = dv.iter().map(|z| -i * z).collect();
        let dui: Vec<Complex64> = du.iter().map(|z| i * z).collect();
        Mat::from_columns(x.len(), &[re, join_blocks(&dvi, &dui)])
    }
    fn solve_lx(&self, _x: &[f64], l: &[f64], rhs: &Mat) -> Result<Mat, LinalgError> {
        let p = self.poly.evaluate(lam(l));
        solve_antidiagonal(&Lu::factor(&p.adjoint())?, &Lu::factor(&p)?, rhs)
    }
    fn residual_preimage(&self, x: &[f64], _l: &[f64]) -> Option<Vec<f64>> {
        Some(x.to_vec())
    }
    fn second_order(&self, x: &[f64], l: &[f64], eta: &[f64], delta: &[f64]) -> Option<Vec<f64>> {
        let (u, v) = split_blocks(x);
        let (eu, ev) = split_blocks(eta);
        let d = lam(delta);
        let p1 = self.poly.derivative(lam(l));
        let p2 = self.poly.second_derivative(lam(l));
        let top_a = p1.adjoint().mul_vec(&ev);
        let top_b = p2.adjoint().mul_vec(&v);
        let bot_a = p1.mul_vec(&eu);
        let bot_b = p2.mul_vec(&u);
        let dc = d.conj();
        let top: Vec<Complex64> = top_a.iter().zip(&top_b).map(|(a, b)| dc * a * 2.0 + dc * dc * b).collect();
        let bot: Vec<Complex64> = bot_a.iter().zip(&bot_b).map(|(a, b)| d * a * 2.0 + d * d * b).collect();
        Some(join_blocks(&top, &bot))
    }
    fn supports_second_order(&self) -> bool {
        true
    }
    fn rayleigh(&self, x: &[f64], hint: Option<&[f64]>) -> Result<Vec<f64>, ModelError> {
        let (u, v) = split_blocks(x);
        let value = crate::linalg::Scalar::modulus(dotc(&v, &u));
        if value < BIORTHOGONALITY_TOL {
            return Err(ModelError::Biorthogonality { value });
        }
        let guess = hint.map_or([self.initial_guess.re, self.initial_guess.im], |h| [h[0], h[1]]);
        let n = |l: &[f64]| {
            let s = self.scalar(x, l);
            vec![s.re, s.im]
        };
        crate::model::implicit_root(n, |l| complex_scalar_matrix(self.scalar_derivative(x, l)), &guess)
    }
    fn rayleigh_jacobian(&self, x: &[f64], l: &[f64]) -> Result<Mat, ModelError> {
        let nl = complex_scalar_matrix(self.scalar_derivative(x, l));
        Ok(Lu::factor(&nl)?.solve_mat(&self.n_x(x, l))?.scale(-1.0))
    }
    fn left_inverse(&self, x: &[f64], l: &[f64]) -> Result<Mat, ModelError> {
        let h = self.llambda(x, l).scale(-1.0);
        gram_left_inverse(&h, Some(&v_dagger(&split_blocks(x).1)))
    }
}
