//! Stiefel eigenproblem: `F(x) = A x + b` on `xᵀx = I_p`, multipliers in
//! packed symmetric `p × p` matrices.
//!
//! `x` is a row-major `n × p` matrix and `A` acts on its flattening. Packed
//! coordinates list the upper triangle `i ≤ j` row by row.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{InstanceError, RetractionError};
use crate::linalg::Mat;
use crate::model::{Constraint, ExplicitLagrangian, ExplicitProblem, RetractionOrder};
use crate::retraction::stiefel_retract;
use crate::rng::{normal_mat, seeded};

pub fn packed_len(p: usize) -> usize {
    p * (p + 1) / 2
}

/// Position of `(i, j)` with `i ≤ j` in the packed layout.
pub fn packed_index(p: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * p - i * (i + 1) / 2 + j
}

pub fn unpack(gamma: &[f64], p: usize) -> Mat {
    Mat::from_fn(p, p, |i, j| gamma[packed_index(p, i, j)])
}

/// Upper triangle of a `p × p` matrix.
pub fn pack(s: &Mat) -> Vec<f64> {
    let p = s.rows();
    let mut out = Vec::with_capacity(packed_len(p));
    for i in 0..p {
        for j in i..p {
            out.push(s[(i, j)]);
        }
    }
    out
}

fn as_matrix(x: &[f64], n: usize, p: usize) -> Mat {
    Mat::from_row_major(n, p, x.to_vec()).expect("n*p entries")
}

#[derive(Clone, Debug)]
pub struct StiefelEigen {
    aten: Mat,
    b: Vec<f64>,
    n: usize,
    p: usize,
}

impl StiefelEigen {
    /// `aten` is `np × np` symmetric, `b` has `np` entries.
    pub fn new(aten: Mat, b: Vec<f64>, n: usize, p: usize) -> Result<Self, InstanceError> {
        if p == 0 || p > n {
            return Err(InstanceError::Invalid("need 1 <= p <= n"));
        }
        if aten.rows() != n * p || aten.cols() != n * p {
            return Err(InstanceError::DimensionMismatch { expected: n * p, actual: aten.rows() });
        }
        if b.len() != n * p {
            return Err(InstanceError::DimensionMismatch { expected: n * p, actual: b.len() });
        }
        if aten.sub(&aten.transpose()).norm_fro() > 1e-12 * aten.norm_fro().max(1.0) {
            return Err(InstanceError::Invalid("operator must be symmetric"));
        }
        Ok(StiefelEigen { aten, b, n, p })
    }

    /// Symmetric Gaussian operator scaled by `1/sqrt(np)` and Gaussian `b`
    /// scaled by `b_scale`.
    pub fn random(n: usize, p: usize, b_scale: f64, seed: u64) -> Result<Self, InstanceError> {
        let mut rng = seeded(seed);
        let aten = crate::rng::symmetric_matrix(&mut rng, n * p);
        let b = normal_mat(&mut rng, n, p).scale(b_scale).into_vec();
        Self::new(aten, b, n, p)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    /// `x · unpack(γ)` flattened.
    fn times_packed(&self, x: &[f64], gamma: &[f64]) -> Vec<f64> {
        as_matrix(x, self.n, self.p).matmul(&unpack(gamma, self.p)).into_vec()
    }

    fn h_of(&self, x: &[f64]) -> Mat {
        let k = packed_len(self.p);
        let mut e = vec![0.0; k];
        let cols: Vec<Vec<f64>> = (0..k)
            .map(|c| {
                e[c] = 1.0;
                let col = self.times_packed(x, &e);
                e[c] = 0.0;
                col
            })
            .collect();
        Mat::from_columns(self.n * self.p, &cols)
    }
}

impl ExplicitLagrangian for StiefelEigen {
    fn dim(&self) -> usize {
        self.n * self.p
    }
    fn dim_lambda(&self) -> usize {
        packed_len(self.p)
    }
    fn f(&self, x: &[f64]) -> Vec<f64> {
        self.aten.mul_vec(x).iter().zip(&self.b).map(|(a, b)| a + b).collect()
    }
    fn h(&self, x: &[f64]) -> Mat {
        self.h_of(x)
    }
    fn jf(&self, _x: &[f64]) -> Mat {
        self.aten.clone()
    }
    fn jh(&self, _x: &[f64], eta: &[f64]) -> Mat {
        self.h_of(eta)
    }
    fn j2f(&self, x: &[f64], _eta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; x.len()])
    }
    fn j2h(&self, x: &[f64], _eta: &[f64]) -> Option<Mat> {
        Some(Mat::zeros(x.len(), packed_len(self.p)))
    }
    fn has_second_derivatives(&self) -> bool {
        true
    }
    fn lx(&self, _x: &[f64], lambda: &[f64]) -> Mat {
        // η ↦ Aη - η S with S = unpack(λ), row-major: (η S)[a, j] = Σ_i η[a, i] S[i, j]
        let s = unpack(lambda, self.p);
        let mut m = self.aten.clone();
        for a in 0..self.n {
            for i in 0..self.p {
                for j in 0..self.p {
                    m[(a * self.p + j, a * self.p + i)] -= s[(i, j)];
                }
            }
        }
        m
    }
}

/// `½(xᵀx - I)` packed, with the polar retraction.
#[derive(Clone, Copy, Debug)]
pub struct StiefelConstraint {
    pub n: usize,
    pub p: usize,
}

impl Constraint for StiefelConstraint {
    fn dim(&self) -> usize {
        self.n * self.p
    }
    fn count(&self) -> usize {
        packed_len(self.p)
    }
    fn value(&self, x: &[f64]) -> Vec<f64> {
        let m = as_matrix(x, self.n, self.p);
        pack(&m.transpose().matmul(&m).sub(&Mat::identity(self.p)).scale(0.5))
    }
    fn jacobian(&self, x: &[f64]) -> Mat {
        let p = self.p;
        let mut jac = Mat::zeros(packed_len(p), self.n * p);
        for i in 0..p {
            for j in i..p {
                let r = packed_index(p, i, j);
                for a in 0..self.n {
                    jac[(r, a * p + i)] += 0.5 * x[a * p + j];
                    jac[(r, a * p + j)] += 0.5 * x[a * p + i];
                }
            }
        }
        jac
    }
    fn second(&self, _x: &[f64], eta: &[f64]) -> Option<Vec<f64>> {
        let e = as_matrix(eta, self.n, self.p);
        Some(pack(&e.transpose().matmul(&e)))
    }
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        stiefel_retract(x, eta, self.n, self.p)
    }
    fn retraction_order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

pub type StiefelProblem = ExplicitProblem<StiefelEigen>;

pub fn build_stiefel(lag: StiefelEigen) -> (StiefelProblem, StiefelConstraint) {
    let (n, p) = lag.shape();
    (ExplicitProblem::gram(lag), StiefelConstraint { n, p })
}

/// `½(xᵀF + Fᵀx)` packed.
pub fn stiefel_rayleigh(lag: &StiefelEigen, x: &[f64]) -> Vec<f64> {
    let (n, p) = lag.shape();
    let xm = as_matrix(x, n, p);
    let f = as_matrix(&lag.f(x), n, p);
    let s = xm.transpose().matmul(&f);
    pack(&s.add(&s.transpose()).scale(0.5))
}

/// Random point with orthonormal columns, flattened row-major.
pub fn random_stiefel_point(n: usize, p: usize, seed: u64) -> Vec<f64> {
    let q = crate::linalg::column_space(&normal_mat(&mut seeded(seed), n, p));
    q.into_vec()
}
