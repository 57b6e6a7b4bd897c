//! Rayleigh quotient iterations on the Grassmann manifold of `p`-planes in
//! `n`-space, represented by orthonormal `n × p` matrices (row-major).

use alloc::vec::Vec;

use crate::error::{InstanceError, SolverError};
use crate::linalg::{Lu, Mat};
use crate::retraction::stiefel_retract;
use crate::solver::{terminal, Decision, FailureReason, IterationState, SolveResult, SolverConfig, StepRecord};

fn as_matrix(x: &[f64], n: usize, p: usize) -> Mat {
    Mat::from_row_major(n, p, x.to_vec()).expect("n*p entries")
}

/// `(xᵀx)⁻¹ xᵀ F`.
fn gram_rayleigh(x: &Mat, f: &Mat) -> Result<Mat, FailureReason> {
    let lu = Lu::factor(&x.transpose().matmul(x)).map_err(|_| FailureReason::RayleighFailed)?;
    lu.solve_mat(&x.transpose().matmul(f)).map_err(|_| FailureReason::RayleighFailed)
}

/// Problem data consumed by [`grassmann_rqi`].
pub trait GrassmannProblem {
    fn shape(&self) -> (usize, usize);
    /// `F(x)` as an `n × p` matrix.
    fn f(&self, x: &Mat) -> Mat;
    /// Tangent step `η` at `x` with `R = (xᵀx)⁻¹ xᵀ F(x)`.
    fn step(&self, x: &Mat, r: &Mat) -> Result<Mat, FailureReason>;

    /// `‖F(x) - x R(x)‖`.
    fn residual(&self, x: &Mat, r: &Mat) -> f64 {
        self.f(x).sub(&x.matmul(r)).norm_fro()
    }
}

/// Invariant subspaces of `A`: `F(x) = A x`.
#[derive(Clone, Debug)]
pub struct GrassmannInvariant {
    a: Mat,
    p: usize,
}

impl GrassmannInvariant {
    pub fn new(a: Mat, p: usize) -> Result<Self, InstanceError> {
        if !a.is_square() {
            return Err(InstanceError::Invalid("matrix must be square"));
        }
        if p == 0 || p > a.rows() {
            return Err(InstanceError::Invalid("need 1 <= p <= n"));
        }
        Ok(GrassmannInvariant { a, p })
    }

    /// Solves `A ζ - ζ R = x`.
    pub fn zeta(&self, x: &Mat, r: &Mat) -> Result<Mat, FailureReason> {
        sylvester(&self.a, r, x).map_err(|_| FailureReason::SingularLx)
    }
}

/// Solves `A Z - Z R = B` through `(I ⊗ A - Rᵀ ⊗ I) vec Z = vec B` with
/// column-stacked `vec`.
pub fn sylvester(a: &Mat, r: &Mat, b: &Mat) -> Result<Mat, crate::error::LinalgError> {
    let n = a.rows();
    let p = r.rows();
    let dim = n * p;
    let mut k = Mat::zeros(dim, dim);
    for c in 0..p {
        for i in 0..n {
            for j in 0..n {
                k[(c * n + i, c * n + j)] += a[(i, j)];
            }
            for l in 0..p {
                k[(c * n + i, l * n + i)] -= r[(l, c)];
            }
        }
    }
    let rhs: Vec<f64> = (0..dim).map(|idx| b[(idx % n, idx / n)]).collect();
    let sol = Lu::factor(&k)?.solve(&rhs)?;
    Ok(Mat::from_fn(n, p, |i, c| sol[c * n + i]))
}

impl GrassmannProblem for GrassmannInvariant {
    fn shape(&self) -> (usize, usize) {
        (self.a.rows(), self.p)
    }
    fn f(&self, x: &Mat) -> Mat {
        self.a.matmul(x)
    }
    /// `η = ζ (xᵀζ)⁻¹ - x`, so that `x + η` spans the columns of `ζ`.
    fn step(&self, x: &Mat, r: &Mat) -> Result<Mat, FailureReason> {
        let z = self.zeta(x, r)?;
        let m = x.transpose().matmul(&z);
        let inv = Lu::factor(&m)
            .and_then(|lu| lu.solve_mat(&Mat::identity(self.p)))
            .map_err(|_| FailureReason::SingularSchur)?;
        Ok(z.matmul(&inv).sub(x))
    }
}

/// Critical points of `½ tr(xᵀ L x) + (α/4) ρ(x)ᵀ L⁻¹ ρ(x)` with
/// `ρ(x) = diag(x (xᵀx)⁻¹ xᵀ)`: `F(x) = L x + α diag(L⁻¹ ρ(x)) x`.
#[derive(Clone, Debug)]
pub struct GrassmannRho {
    l: Mat,
    l_lu: Lu,
    alpha: f64,
    p: usize,
}

impl GrassmannRho {
    pub fn new(l: Mat, alpha: f64, p: usize) -> Result<Self, InstanceError> {
        if !l.is_square() {
            return Err(InstanceError::Invalid("matrix must be square"));
        }
        if p == 0 || p > l.rows() {
            return Err(InstanceError::Invalid("need 1 <= p <= n"));
        }
        let l_lu = Lu::factor(&l).map_err(|_| InstanceError::Invalid("L must be invertible"))?;
        Ok(GrassmannRho { l, l_lu, alpha, p })
    }

    /// Tridiagonal `tridiag(-1, 2 + shift, -1)`.
    pub fn laplacian(n: usize, shift: f64) -> Mat {
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                2.0 + shift
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        })
    }

    fn gram_inverse(x: &Mat) -> Mat {
        let p = x.cols();
        Lu::factor(&x.transpose().matmul(x))
            .and_then(|lu| lu.solve_mat(&Mat::identity(p)))
            .unwrap_or_else(|_| Mat::zeros(p, p))
    }

    pub fn rho(&self, x: &Mat) -> Vec<f64> {
        let g = Self::gram_inverse(x);
        let xg = x.matmul(&g);
        (0..x.rows()).map(|k| crate::linalg::dot(xg.row(k), x.row(k))).collect()
    }

    fn d_rho(&self, x: &Mat, eta: &Mat) -> Vec<f64> {
        let g = Self::gram_inverse(x);
        let xg = x.matmul(&g);
        let eg = eta.matmul(&g);
        let sym = eta.transpose().matmul(x).add(&x.transpose().matmul(eta));
        let mid = xg.matmul(&sym).matmul(&g);
        (0..x.rows())
            .map(|k| {
                let a = crate::linalg::dot(eg.row(k), x.row(k));
                let b = crate::linalg::dot(xg.row(k), eta.row(k));
                let c = crate::linalg::dot(mid.row(k), x.row(k));
                a + b - c
            })
            .collect()
    }

    fn scale_rows(&self, w: &[f64], m: &Mat) -> Mat {
        Mat::from_fn(m.rows(), m.cols(), |i, j| w[i] * m[(i, j)])
    }

    /// `jF(x)[η]`.
    pub fn jf_apply(&self, x: &Mat, eta: &Mat) -> Mat {
        let w = self.l_lu.solve(&self.rho(x)).expect("factored");
        let dw = self.l_lu.solve(&self.d_rho(x, eta)).expect("factored");
        let a = self.l.matmul(eta);
        let b = self.scale_rows(&dw, x).scale(self.alpha);
        let c = self.scale_rows(&w, eta).scale(self.alpha);
        a.add(&b).add(&c)
    }

    /// Dense `jF(x)` on row-major flattenings.
    pub fn jf(&self, x: &Mat) -> Mat {
        let (n, p) = (x.rows(), x.cols());
        let mut e = Mat::zeros(n, p);
        let mut cols = Vec::with_capacity(n * p);
        for idx in 0..n * p {
            e[(idx / p, idx % p)] = 1.0;
            cols.push(self.jf_apply(x, &e).into_vec());
            e[(idx / p, idx % p)] = 0.0;
        }
        Mat::from_columns(n * p, &cols)
    }

    /// Schur step with `ζ` stored column by column for the `p²` basis
    /// multipliers `E_kl`, and the tangency system `xᵀη = 0`.
    pub fn schur_parts(&self, x: &Mat, r: &Mat) -> Result<(Mat, Vec<f64>, Vec<f64>), FailureReason> {
        let (n, p) = (x.rows(), x.cols());
        let mut lx = self.jf(x);
        for a in 0..n {
            for i in 0..p {
                for j in 0..p {
                    lx[(a * p + j, a * p + i)] -= r[(i, j)];
                }
            }
        }
        let lu = Lu::factor(&lx).map_err(|_| FailureReason::SingularLx)?;
        let resid = self.f(x).sub(&x.matmul(r)).into_vec();
        let xi = lu.solve(&resid).map_err(|_| FailureReason::SingularLx)?;
        let mut cols = Vec::with_capacity(p * p);
        for k in 0..p {
            for l in 0..p {
                let mut e = Mat::zeros(p, p);
                e[(k, l)] = 1.0;
                cols.push(lu.solve(x.matmul(&e).as_slice()).map_err(|_| FailureReason::SingularLx)?);
            }
        }
        let zeta = Mat::from_columns(n * p, &cols);
        let xt = x.transpose();
        let tangency = |v: &[f64]| xt.matmul(&as_matrix(v, n, p)).into_vec();
        let system = Mat::from_columns(p * p, &cols.iter().map(|c| tangency(c)).collect::<Vec<_>>());
        let theta = Lu::factor(&system)
            .and_then(|s| s.solve(&tangency(&xi)))
            .map_err(|_| FailureReason::SingularSchur)?;
        let zt = zeta.mul_vec(&theta);
        let eta: Vec<f64> = zt.iter().zip(&xi).map(|(a, b)| a - b).collect();
        Ok((zeta, xi, eta))
    }
}

impl GrassmannProblem for GrassmannRho {
    fn shape(&self) -> (usize, usize) {
        (self.l.rows(), self.p)
    }
    fn f(&self, x: &Mat) -> Mat {
        let w = self.l_lu.solve(&self.rho(x)).expect("factored");
        self.l.matmul(x).add(&self.scale_rows(&w, x).scale(self.alpha))
    }
    fn step(&self, x: &Mat, r: &Mat) -> Result<Mat, FailureReason> {
        let (n, p) = (x.rows(), x.cols());
        let (_, _, eta) = self.schur_parts(x, r)?;
        Ok(as_matrix(&eta, n, p))
    }
}

/// Rayleigh quotient iteration with polar retraction. The multiplier in the
/// result is `R(x)` flattened row-major.
pub fn grassmann_rqi<G: GrassmannProblem + ?Sized>(
    g: &G,
    x0: &[f64],
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&StepRecord<'_>),
) -> Result<SolveResult, SolverError> {
    let (n, p) = g.shape();
    if x0.len() != n * p {
        return Err(SolverError::BadStart { expected: n * p, actual: x0.len() });
    }
    let mut x = as_matrix(x0, n, p);
    let mut out = SolveResult {
        x: Vec::new(),
        lambda: Vec::new(),
        converged: false,
        iterations: 0,
        residual_history: Vec::new(),
        step_history: Vec::new(),
        lambda_history: Vec::new(),
        failure: None,
    };
    let mut step_norm = 0.0;
    let mut i = 0;
    let failure = loop {
        let r = match gram_rayleigh(&x, &g.f(&x)) {
            Ok(r) => r,
            Err(f) => break Some(f),
        };
        let res = g.residual(&x, &r);
        out.lambda = r.as_slice().to_vec();
        out.residual_history.push(res);
        out.lambda_history.push(out.lambda.clone());
        match terminal(&IterationState { iteration: i, residual: res, step_norm }, cfg) {
            Decision::Success => break None,
            Decision::Failure(f) => break Some(f),
            Decision::Continue => {}
        }
        let eta = match g.step(&x, &r) {
            Ok(e) => e,
            Err(f) => break Some(f),
        };
        step_norm = eta.norm_fro();
        out.step_history.push(step_norm);
        if !(step_norm <= cfg.max_step_norm) {
            break Some(FailureReason::Diverged);
        }
        let next = match stiefel_retract(x.as_slice(), eta.as_slice(), n, p) {
            Ok(v) => v,
            Err(_) => break Some(FailureReason::DegenerateRetraction),
        };
        observer(&StepRecord { iteration: i, x: x.as_slice(), lambda: &out.lambda, eta: eta.as_slice(), x_next: &next, residual: res });
        x = as_matrix(&next, n, p);
        i += 1;
    };
    out.x = x.into_vec();
    out.iterations = i;
    out.converged = failure.is_none();
    out.failure = failure;
    Ok(out)
}

/// Norm of the projected gradient `(I - x xᵀ) F(x)` for orthonormal `x`.
pub fn projected_gradient<G: GrassmannProblem + ?Sized>(g: &G, x: &[f64]) -> f64 {
    let (n, p) = g.shape();
    let xm = as_matrix(x, n, p);
    let f = g.f(&xm);
    f.sub(&xm.matmul(&xm.transpose().matmul(&f))).norm_fro()
}

/// Largest principal angle sine between the column spans of two orthonormal
/// `n × p` matrices: `‖(I - y yᵀ) x‖₂` bounded by the Frobenius norm.
pub fn subspace_distance(x: &[f64], y: &[f64], n: usize, p: usize) -> f64 {
    let xm = as_matrix(x, n, p);
    let ym = as_matrix(y, n, p);
    xm.sub(&ym.matmul(&ym.transpose().matmul(&xm))).norm_fro()
}
