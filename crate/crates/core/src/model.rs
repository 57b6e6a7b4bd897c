//! Vector Lagrangians, constraints, left inverses and Rayleigh quotients.
//!
//! All spaces are flat real vectors. Complex problems use the split layout
//! `[re; im]` produced by [`crate::linalg::realify_vector`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{LinalgError, ModelError, RetractionError};
use crate::linalg::{norm, sub, Lu, Mat};

/// Condition estimate above which `D·H` counts as singular.
pub const LEFT_INVERSE_CONDITION_LIMIT: f64 = 1e14;

/// Declared order of a retraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RetractionOrder {
    First,
    Second,
}

/// Lagrangian of the form `L(x, λ) = F(x) - H(x) λ`.
pub trait ExplicitLagrangian {
    /// Dimension of the input (and output) space.
    fn dim(&self) -> usize;
    /// Dimension of the multiplier space.
    fn dim_lambda(&self) -> usize;
    fn f(&self, x: &[f64]) -> Vec<f64>;
    /// `H(x)` as a `dim × dim_lambda` matrix.
    fn h(&self, x: &[f64]) -> Mat;
    fn jf(&self, x: &[f64]) -> Mat;
    /// Directional derivative `jH(x)[η]`, a `dim × dim_lambda` matrix.
    fn jh(&self, x: &[f64], eta: &[f64]) -> Mat;
    /// `J²F(x)[η, η]`.
    fn j2f(&self, _x: &[f64], _eta: &[f64]) -> Option<Vec<f64>> {
        None
    }
    /// `J²H(x)[η, η]`, a `dim × dim_lambda` matrix.
    fn j2h(&self, _x: &[f64], _eta: &[f64]) -> Option<Mat> {
        None
    }
    fn has_second_derivatives(&self) -> bool {
        false
    }
    /// Rejects points where the Rayleigh quotient is not defined.
    fn validate(&self, _x: &[f64]) -> Result<(), ModelError> {
        Ok(())
    }

    /// `Lx(x, λ) = jF(x) - jH(x)[·] λ`.
    fn lx(&self, x: &[f64], lambda: &[f64]) -> Mat {
        let n = self.dim();
        let mut m = self.jf(x);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.jh(x, &e).mul_vec(lambda);
            for i in 0..n {
                m[(i, j)] -= col[i];
            }
            e[j] = 0.0;
        }
        m
    }

    fn solve_lx(&self, x: &[f64], lambda: &[f64], rhs: &Mat) -> Result<Mat, LinalgError> {
        Lu::factor(&self.lx(x, lambda))?.solve_mat(rhs)
    }
}

/// Chooses the `D` in `H⁻ = (D H)⁻¹ D`.
pub trait LeftInverse<L: ?Sized> {
    /// `D(x)`, a `dim_lambda × dim` matrix.
    fn dagger(&self, lag: &L, x: &[f64]) -> Mat;
    /// Directional derivative of `D` along `η`.
    fn dagger_derivative(&self, lag: &L, x: &[f64], eta: &[f64]) -> Mat;
}

/// `D = H(x)ᵀ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Gram;

impl<L: ExplicitLagrangian + ?Sized> LeftInverse<L> for Gram {
    fn dagger(&self, lag: &L, x: &[f64]) -> Mat {
        lag.h(x).transpose()
    }
    fn dagger_derivative(&self, lag: &L, x: &[f64], eta: &[f64]) -> Mat {
        lag.jh(x, eta).transpose()
    }
}

/// Constant `D`.
#[derive(Clone, Debug)]
pub struct FixedDagger(pub Mat);

impl<L: ExplicitLagrangian + ?Sized> LeftInverse<L> for FixedDagger {
    fn dagger(&self, _lag: &L, _x: &[f64]) -> Mat {
        self.0.clone()
    }
    fn dagger_derivative(&self, lag: &L, _x: &[f64], _eta: &[f64]) -> Mat {
        Mat::zeros(lag.dim_lambda(), lag.dim())
    }
}

/// Runtime choice between [`Gram`] and [`FixedDagger`].
#[derive(Clone, Debug)]
pub enum Dagger {
    Gram,
    Fixed(Mat),
}

impl<L: ExplicitLagrangian + ?Sized> LeftInverse<L> for Dagger {
    fn dagger(&self, lag: &L, x: &[f64]) -> Mat {
        match self {
            Dagger::Gram => Gram.dagger(lag, x),
            Dagger::Fixed(d) => d.clone(),
        }
    }
    fn dagger_derivative(&self, lag: &L, x: &[f64], eta: &[f64]) -> Mat {
        match self {
            Dagger::Gram => Gram.dagger_derivative(lag, x, eta),
            Dagger::Fixed(_) => Mat::zeros(lag.dim_lambda(), lag.dim()),
        }
    }
}

/// `(D H)⁻¹ D` with `D = Hᵀ` unless given. Fails when `D H` is singular or
/// its condition estimate exceeds [`LEFT_INVERSE_CONDITION_LIMIT`].
pub fn gram_left_inverse(h: &Mat, dagger: Option<&Mat>) -> Result<Mat, ModelError> {
    let owned;
    let d = match dagger {
        Some(d) => d,
        None => {
            owned = h.transpose();
            &owned
        }
    };
    let dh = d.matmul(h);
    let lu = Lu::factor(&dh).map_err(|_| ModelError::SingularLeftInverse { condition: f64::INFINITY })?;
    let condition = lu.condition_estimate();
    if !(condition <= LEFT_INVERSE_CONDITION_LIMIT) {
        return Err(ModelError::SingularLeftInverse { condition });
    }
    Ok(lu.solve_mat(d)?)
}

/// `λ = H⁻(x) F(x)`.
pub fn rayleigh_explicit<L, D>(lag: &L, linv: &D, x: &[f64]) -> Result<Vec<f64>, ModelError>
where
    L: ExplicitLagrangian + ?Sized,
    D: LeftInverse<L> + ?Sized,
{
    lag.validate(x)?;
    let m = gram_left_inverse(&lag.h(x), Some(&linv.dagger(lag, x)))?;
    Ok(m.mul_vec(&lag.f(x)))
}

/// `Π w = w - H H⁻ w`.
pub fn projection_apply(h: &Mat, left_inverse: &Mat, w: &[f64]) -> Vec<f64> {
    sub(w, &h.mul_vec(&left_inverse.mul_vec(w)))
}

/// Dense `I - H H⁻`.
pub fn projection_matrix(h: &Mat, left_inverse: &Mat) -> Mat {
    Mat::identity(h.rows()).sub(&h.matmul(left_inverse))
}

/// Lagrangian in general form, as consumed by the solvers.
pub trait GeneralLagrangian {
    fn dim(&self) -> usize;
    fn dim_lambda(&self) -> usize;
    fn residual(&self, x: &[f64], lambda: &[f64]) -> Vec<f64>;
    fn lx(&self, x: &[f64], lambda: &[f64]) -> Mat;
    fn llambda(&self, x: &[f64], lambda: &[f64]) -> Mat;

    /// Solves `Lx X = rhs`.
    fn solve_lx(&self, x: &[f64], lambda: &[f64], rhs: &Mat) -> Result<Mat, LinalgError> {
        Lu::factor(&self.lx(x, lambda))?.solve_mat(rhs)
    }

    /// Known closed form of `Lx⁻¹ L(x, λ)`, if any.
    fn residual_preimage(&self, _x: &[f64], _lambda: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// `Lxx[η²] + 2 Lxλ[η, δ] + Lλλ[δ²]`.
    fn second_order(&self, _x: &[f64], _lambda: &[f64], _eta: &[f64], _delta: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn supports_second_order(&self) -> bool {
        false
    }

    /// Generalized Rayleigh quotient. `hint` seeds implicit root solves.
    fn rayleigh(&self, x: &[f64], hint: Option<&[f64]>) -> Result<Vec<f64>, ModelError>;

    /// Jacobian of the Rayleigh quotient, `dim_lambda × dim`.
    fn rayleigh_jacobian(&self, _x: &[f64], _lambda: &[f64]) -> Result<Mat, ModelError> {
        Err(ModelError::MissingSecondDerivatives)
    }

    /// Left inverse `M` of `H = -Lλ`, used by projections and the tangent form.
    fn left_inverse(&self, x: &[f64], lambda: &[f64]) -> Result<Mat, ModelError> {
        let h = self.llambda(x, lambda).scale(-1.0);
        gram_left_inverse(&h, None)
    }
}

/// Equality constraint `C(x) = 0` with an attached retraction.
pub trait Constraint {
    fn dim(&self) -> usize;
    /// Number of scalar equations.
    fn count(&self) -> usize;
    fn value(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> Mat;
    /// `J²C(x)[η, η]`.
    fn second(&self, _x: &[f64], _eta: &[f64]) -> Option<Vec<f64>> {
        None
    }
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError>;
    fn retraction_order(&self) -> RetractionOrder;
}

/// Explicit Lagrangian with pluggable left inverses for the Rayleigh quotient
/// and for the projection.
#[derive(Clone, Debug)]
pub struct ExplicitProblem<L, R = Gram, P = Gram> {
    pub lagrangian: L,
    pub rayleigh_dagger: R,
    pub projection_dagger: P,
}

impl<L: ExplicitLagrangian> ExplicitProblem<L, Gram, Gram> {
    pub fn gram(lagrangian: L) -> Self {
        ExplicitProblem { lagrangian, rayleigh_dagger: Gram, projection_dagger: Gram }
    }
}

impl<L, R> ExplicitProblem<L, R, R>
where
    L: ExplicitLagrangian,
    R: LeftInverse<L> + Clone,
{
    pub fn with_dagger(lagrangian: L, dagger: R) -> Self {
        ExplicitProblem { lagrangian, rayleigh_dagger: dagger.clone(), projection_dagger: dagger }
    }
}

impl<L, R, P> GeneralLagrangian for ExplicitProblem<L, R, P>
where
    L: ExplicitLagrangian,
    R: LeftInverse<L>,
    P: LeftInverse<L>,
{
    fn dim(&self) -> usize {
        self.lagrangian.dim()
    }

    fn dim_lambda(&self) -> usize {
        self.lagrangian.dim_lambda()
    }

    fn residual(&self, x: &[f64], lambda: &[f64]) -> Vec<f64> {
        sub(&self.lagrangian.f(x), &self.lagrangian.h(x).mul_vec(lambda))
    }

    fn lx(&self, x: &[f64], lambda: &[f64]) -> Mat {
        self.lagrangian.lx(x, lambda)
    }

    fn llambda(&self, x: &[f64], _lambda: &[f64]) -> Mat {
        self.lagrangian.h(x).scale(-1.0)
    }

    fn solve_lx(&self, x: &[f64], lambda: &[f64], rhs: &Mat) -> Result<Mat, LinalgError> {
        self.lagrangian.solve_lx(x, lambda, rhs)
    }

    fn second_order(&self, x: &[f64], lambda: &[f64], eta: &[f64], delta: &[f64]) -> Option<Vec<f64>> {
        let lag = &self.lagrangian;
        let mut out = lag.j2f(x, eta)?;
        let h2 = lag.j2h(x, eta)?.mul_vec(lambda);
        let cross = lag.jh(x, eta).mul_vec(delta);
        for i in 0..out.len() {
            out[i] -= h2[i] + 2.0 * cross[i];
        }
        Some(out)
    }

    fn supports_second_order(&self) -> bool {
        self.lagrangian.has_second_derivatives()
    }

    fn rayleigh(&self, x: &[f64], _hint: Option<&[f64]>) -> Result<Vec<f64>, ModelError> {
        rayleigh_explicit(&self.lagrangian, &self.rayleigh_dagger, x)
    }

    fn rayleigh_jacobian(&self, x: &[f64], lambda: &[f64]) -> Result<Mat, ModelError> {
        let lag = &self.lagrangian;
        let n = lag.dim();
        let k = lag.dim_lambda();
        let d = self.rayleigh_dagger.dagger(lag, x);
        let h = lag.h(x);
        let f = lag.f(x);
        let jf = lag.jf(x);
        let lu = Lu::factor(&d.matmul(&h))?;
        let mut out = Mat::zeros(k, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let dd = self.rayleigh_dagger.dagger_derivative(lag, x, &e);
            let jh = lag.jh(x, &e);
            let jf_col = jf.column(j);
            let mut rhs = dd.mul_vec(&f);
            let t1 = d.mul_vec(&jf_col);
            let t2 = dd.mul_vec(&h.mul_vec(lambda));
            let t3 = d.mul_vec(&jh.mul_vec(lambda));
            for i in 0..k {
                rhs[i] += t1[i] - t2[i] - t3[i];
            }
            out.set_column(j, &lu.solve(&rhs)?);
            e[j] = 0.0;
        }
        Ok(out)
    }

    fn left_inverse(&self, x: &[f64], _lambda: &[f64]) -> Result<Mat, ModelError> {
        let lag = &self.lagrangian;
        gram_left_inverse(&lag.h(x), Some(&self.projection_dagger.dagger(lag, x)))
    }
}

/// Root of `N(x, λ) = 0` in `λ` and the Jacobian `-Nλ⁻¹ Nx` of the implicit map.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitRayleigh {
    pub lambda: Vec<f64>,
    pub jacobian: Mat,
}

/// Damped Newton tolerance for implicit Rayleigh roots.
pub const IMPLICIT_TOL: f64 = 1e-12;
const IMPLICIT_MAX_STEPS: usize = 50;

/// Solves `N(x, λ) = 0` for `λ` by damped Newton from `guess`.
pub fn implicit_root(
    n: impl Fn(&[f64]) -> Vec<f64>,
    n_lambda: impl Fn(&[f64]) -> Mat,
    guess: &[f64],
) -> Result<Vec<f64>, ModelError> {
    let mut lambda = guess.to_vec();
    let mut val = n(&lambda);
    let mut res = norm(&val);
    for _ in 0..IMPLICIT_MAX_STEPS {
        if res <= IMPLICIT_TOL {
            return Ok(lambda);
        }
        let step = Lu::factor(&n_lambda(&lambda))
            .and_then(|lu| lu.solve(&val))
            .map_err(|_| ModelError::SingularLeftInverse { condition: f64::INFINITY })?;
        let scale = norm(&lambda).max(1.0);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = lambda.iter().zip(&step).map(|(l, s)| l - t * s).collect();
            let tv = n(&trial);
            let tr = norm(&tv);
            if tr < res || tr <= IMPLICIT_TOL {
                lambda = trial;
                val = tv;
                res = tr;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // stagnation at the rounding floor
            if norm(&step) <= 64.0 * f64::EPSILON * scale {
                return Ok(lambda);
            }
            return Err(ModelError::RayleighNoConvergence { residual: res });
        }
    }
    if res <= IMPLICIT_TOL {
        Ok(lambda)
    } else {
        Err(ModelError::RayleighNoConvergence { residual: res })
    }
}

/// Implicit Rayleigh quotient: root of `N(x, ·)` near `guess` together with
/// `J_R = -Nλ⁻¹ Nx` evaluated there.
pub fn rayleigh_implicit(
    n: impl Fn(&[f64], &[f64]) -> Vec<f64>,
    n_lambda: impl Fn(&[f64], &[f64]) -> Mat,
    n_x: impl Fn(&[f64], &[f64]) -> Mat,
    x: &[f64],
    guess: &[f64],
) -> Result<ImplicitRayleigh, ModelError> {
    let lambda = implicit_root(|l| n(x, l), |l| n_lambda(x, l), guess)?;
    let nl = Lu::factor(&n_lambda(x, &lambda))?;
    let jacobian = nl.solve_mat(&n_x(x, &lambda))?.scale(-1.0);
    Ok(ImplicitRayleigh { lambda, jacobian })
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], step: f64) -> Mat {
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + step;
        let fp = f(&xp);
        xp[j] = x[j] - step;
        let fm = f(&xp);
        xp[j] = x[j];
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect::<Vec<f64>>());
    }
    let rows = cols.first().map_or(0, |c| c.len());
    Mat::from_columns(rows, &cols)
}

/// Central-difference directional derivative of `f` at `x` along `dir`.
pub fn fd_directional(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], dir: &[f64], step: f64) -> Vec<f64> {
    let xp: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + step * d).collect();
    let xm: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a - step * d).collect();
    let fp = f(&xp);
    let fm = f(&xm);
    fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect()
}

/// `max |a - b| / max(1, max |b|)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|v| v.abs()).fold(1.0, f64::max);
    diff / scale
}

/// Finite-difference step used by the derivative checks.
pub const FD_STEP: f64 = 1e-6;

/// Derivative callbacks that can be checked against finite differences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    JF,
    JH,
    J2F,
    J2H,
    JC,
    J2C,
    Lx,
    Llambda,
}

/// Compares an analytic derivative of an explicit Lagrangian with central
/// differences. Directional derivatives use `dir`. Returns `None` when the
/// callback is absent.
pub fn fd_check_explicit<L: ExplicitLagrangian + ?Sized>(
    lag: &L,
    x: &[f64],
    lambda: &[f64],
    dir: &[f64],
    which: Derivative,
) -> Option<f64> {
    let h = FD_STEP;
    match which {
        Derivative::JF => {
            let fd = fd_jacobian(|y| lag.f(y), x, h);
            Some(relative_error(lag.jf(x).as_slice(), fd.as_slice()))
        }
        Derivative::JH => {
            let analytic = lag.jh(x, dir);
            let fd = fd_directional(|y| lag.h(y).into_vec(), x, dir, h);
            Some(relative_error(analytic.as_slice(), &fd))
        }
        Derivative::J2F => {
            let analytic = lag.j2f(x, dir)?;
            let fd = fd_directional(|y| lag.jf(y).mul_vec(dir), x, dir, h);
            Some(relative_error(&analytic, &fd))
        }
        Derivative::J2H => {
            let analytic = lag.j2h(x, dir)?;
            let fd = fd_directional(|y| lag.jh(y, dir).into_vec(), x, dir, h);
            Some(relative_error(analytic.as_slice(), &fd))
        }
        Derivative::Lx => {
            let fd = fd_jacobian(|y| sub(&lag.f(y), &lag.h(y).mul_vec(lambda)), x, h);
            Some(relative_error(lag.lx(x, lambda).as_slice(), fd.as_slice()))
        }
        Derivative::Llambda => {
            let analytic = lag.h(x).scale(-1.0);
            let fd = fd_jacobian(|l| sub(&lag.f(x), &lag.h(x).mul_vec(l)), lambda, h);
            Some(relative_error(analytic.as_slice(), fd.as_slice()))
        }
        Derivative::JC | Derivative::J2C => None,
    }
}

/// Finite-difference check of a constraint's `jC` or `j2C`.
pub fn fd_check_constraint<C: Constraint + ?Sized>(c: &C, x: &[f64], dir: &[f64], which: Derivative) -> Option<f64> {
    let h = FD_STEP;
    match which {
        Derivative::JC => {
            let fd = fd_jacobian(|y| c.value(y), x, h);
            Some(relative_error(c.jacobian(x).as_slice(), fd.as_slice()))
        }
        Derivative::J2C => {
            let analytic = c.second(x, dir)?;
            let fd = fd_directional(|y| c.jacobian(y).mul_vec(dir), x, dir, h);
            Some(relative_error(&analytic, &fd))
        }
        _ => None,
    }
}

/// Finite-difference check of a general Lagrangian's `Lx` or `Lλ`.
pub fn fd_check_general<G: GeneralLagrangian + ?Sized>(
    g: &G,
    x: &[f64],
    lambda: &[f64],
    which: Derivative,
) -> Option<f64> {
    let h = FD_STEP;
    match which {
        Derivative::Lx => {
            let fd = fd_jacobian(|y| g.residual(y, lambda), x, h);
            Some(relative_error(g.lx(x, lambda).as_slice(), fd.as_slice()))
        }
        Derivative::Llambda => {
            let fd = fd_jacobian(|l| g.residual(x, l), lambda, h);
            Some(relative_error(g.llambda(x, lambda).as_slice(), fd.as_slice()))
        }
        _ => None,
    }
}

/// Finite-difference check of `Lxx[η²] + 2Lxλ[η,δ] + Lλλ[δ²]` against the
/// directional derivative of `Lx η + Lλ δ` along `(η, δ)`.
pub fn fd_check_second_order<G: GeneralLagrangian + ?Sized>(
    g: &G,
    x: &[f64],
    lambda: &[f64],
    eta: &[f64],
    delta: &[f64],
) -> Option<f64> {
    let analytic = g.second_order(x, lambda, eta, delta)?;
    let h = FD_STEP;
    let n = x.len();
    let mut joint = x.to_vec();
    joint.extend_from_slice(lambda);
    let mut dir = eta.to_vec();
    dir.extend_from_slice(delta);
    let first = |z: &[f64]| {
        let (zx, zl) = z.split_at(n);
        let a = g.lx(zx, zl).mul_vec(eta);
        let b = g.llambda(zx, zl).mul_vec(delta);
        a.iter().zip(&b).map(|(p, q)| p + q).collect::<Vec<f64>>()
    };
    let fd = fd_directional(first, &joint, &dir, h);
    Some(relative_error(&analytic, &fd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, normalized};
    use crate::rng::{normal_mat, normal_vec, seeded, symmetric_matrix, unit_vector};

    /// `F = A x`, `H = x`.
    struct MatrixEigen {
        a: Mat,
    }

    impl ExplicitLagrangian for MatrixEigen {
        fn dim(&self) -> usize {
            self.a.rows()
        }
        fn dim_lambda(&self) -> usize {
            1
        }
        fn f(&self, x: &[f64]) -> Vec<f64> {
            self.a.mul_vec(x)
        }
        fn h(&self, x: &[f64]) -> Mat {
            Mat::column_vector(x)
        }
        fn jf(&self, _x: &[f64]) -> Mat {
            self.a.clone()
        }
        fn jh(&self, _x: &[f64], eta: &[f64]) -> Mat {
            Mat::column_vector(eta)
        }
    }

    #[test]
    fn sphere_left_inverse_is_transpose() {
        let x = normalized(&[1.0, 2.0, -2.0]).unwrap();
        let m = gram_left_inverse(&Mat::column_vector(&x), None).unwrap();
        let w = [0.3, 0.1, 4.0];
        assert!((m.mul_vec(&w)[0] - dot(&x, &w)).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_columns_left_inverse_is_transpose() {
        let q = crate::linalg::column_space(&normal_mat(&mut seeded(4), 5, 2));
        let m = gram_left_inverse(&q, None).unwrap();
        assert!(m.sub(&q.transpose()).norm_fro() < 1e-14);
    }

    #[test]
    fn left_inverse_recovers_multiplier() {
        let mut rng = seeded(8);
        let h = normal_mat(&mut rng, 6, 2);
        let mu = normal_vec(&mut rng, 2);
        let m = gram_left_inverse(&h, None).unwrap();
        let back = m.mul_vec(&h.mul_vec(&mu));
        assert!(norm(&sub(&back, &mu)) < 1e-12);
    }

    #[test]
    fn singular_dagger_product_is_rejected() {
        let h = Mat::column_vector(&[1.0, 0.0]);
        let d = Mat::from_row_major(1, 2, vec![0.0, 1.0]).unwrap();
        assert!(matches!(gram_left_inverse(&h, Some(&d)), Err(ModelError::SingularLeftInverse { .. })));
    }

    #[test]
    fn rayleigh_examples() {
        let eye = MatrixEigen { a: Mat::identity(3) };
        let x = normalized(&[1.0, -2.0, 0.5]).unwrap();
        assert!((rayleigh_explicit(&eye, &Gram, &x).unwrap()[0] - 1.0).abs() < 1e-15);
        let d = MatrixEigen { a: Mat::diagonal(&[1.0, 2.0]) };
        assert_eq!(rayleigh_explicit(&d, &Gram, &[0.0, 1.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn rayleigh_matches_quadratic_form() {
        let mut rng = seeded(21);
        let a = symmetric_matrix(&mut rng, 5);
        let x = unit_vector(&mut rng, 5);
        let quad = dot(&x, &a.mul_vec(&x));
        let lag = MatrixEigen { a };
        assert!((rayleigh_explicit(&lag, &Gram, &x).unwrap()[0] - quad).abs() < 1e-13);
    }

    #[test]
    fn projection_properties() {
        let mut rng = seeded(2);
        let x = unit_vector(&mut rng, 4);
        let h = Mat::column_vector(&x);
        let m = gram_left_inverse(&h, None).unwrap();
        assert!(norm(&projection_apply(&h, &m, &x)) < 1e-12);
        let w = normal_vec(&mut rng, 4);
        let once = projection_apply(&h, &m, &w);
        let xw = dot(&x, &w);
        let tangent: Vec<f64> = w.iter().zip(&x).map(|(a, b)| a - xw * b).collect();
        assert!(norm(&sub(&once, &tangent)) < 1e-14);
        let twice = projection_apply(&h, &m, &once);
        assert!(norm(&sub(&once, &twice)) < 1e-12);
    }

    #[test]
    fn implicit_linear_case_in_one_step() {
        let mut rng = seeded(5);
        let a = symmetric_matrix(&mut rng, 4);
        let z = unit_vector(&mut rng, 4);
        let n = |x: &[f64], l: &[f64]| vec![dot(x, &a.mul_vec(x)) - l[0] * dot(x, x)];
        let nl = |x: &[f64], _l: &[f64]| Mat::from_row_major(1, 1, vec![-dot(x, x)]).unwrap();
        let nx = |x: &[f64], l: &[f64]| {
            let g: Vec<f64> = a.mul_vec(x).iter().zip(x).map(|(ax, xi)| 2.0 * ax - 2.0 * l[0] * xi).collect();
            Mat::from_row_major(1, x.len(), g).unwrap()
        };
        let r = rayleigh_implicit(n, nl, nx, &z, &[0.0]).unwrap();
        assert!((r.lambda[0] - dot(&z, &a.mul_vec(&z))).abs() < 1e-14);
        // J_R on the sphere is 2(Az - λz)ᵀ
        let g: Vec<f64> = a.mul_vec(&z).iter().zip(&z).map(|(p, q)| 2.0 * (p - r.lambda[0] * q)).collect();
        assert!(norm(&sub(r.jacobian.as_slice(), &g)) < 1e-13);
    }

    #[test]
    fn fd_checks_on_matrix_lagrangian() {
        let mut rng = seeded(6);
        let lag = MatrixEigen { a: normal_mat(&mut rng, 4, 4) };
        let x = normal_vec(&mut rng, 4);
        let dir = normal_vec(&mut rng, 4);
        for which in [Derivative::JF, Derivative::JH, Derivative::Lx, Derivative::Llambda] {
            assert!(fd_check_explicit(&lag, &x, &[0.7], &dir, which).unwrap() < 1e-7, "{which:?}");
        }
        assert!(fd_check_explicit(&lag, &x, &[0.7], &dir, Derivative::J2F).is_none());
    }

    #[test]
    fn gram_rayleigh_jacobian_matches_fd() {
        let mut rng = seeded(9);
        let lag = MatrixEigen { a: normal_mat(&mut rng, 4, 4) };
        let prob = ExplicitProblem::gram(lag);
        let x = normal_vec(&mut rng, 4);
        let lam = prob.rayleigh(&x, None).unwrap();
        let j = prob.rayleigh_jacobian(&x, &lam).unwrap();
        let fd = fd_jacobian(|y| prob.rayleigh(y, None).unwrap(), &x, 1e-6);
        assert!(relative_error(j.as_slice(), fd.as_slice()) < 1e-7);
    }
}
