//! Matrix eigenproblems `A x = λ x` under a sphere or linear normalization.

use alloc::vec;
use alloc::vec::Vec;

use crate::constraints::{AffineConstraint, SphereConstraint};
use crate::error::{InstanceError, LinalgError, RetractionError};
use crate::linalg::{Lu, Mat};
use crate::model::{Constraint, Dagger, ExplicitLagrangian, ExplicitProblem, RetractionOrder};

/// `F(x) = A x`, `H(x) = x`.
#[derive(Clone, Debug)]
pub struct MatrixEigen {
    a: Mat,
}

impl MatrixEigen {
    pub fn new(a: Mat) -> Result<Self, InstanceError> {
        if !a.is_square() {
            return Err(InstanceError::Invalid("matrix must be square"));
        }
        Ok(MatrixEigen { a })
    }

    pub fn matrix(&self) -> &Mat {
        &self.a
    }
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
    fn j2f(&self, x: &[f64], _eta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; x.len()])
    }
    fn j2h(&self, x: &[f64], _eta: &[f64]) -> Option<Mat> {
        Some(Mat::zeros(x.len(), 1))
    }
    fn has_second_derivatives(&self) -> bool {
        true
    }
    fn lx(&self, _x: &[f64], lambda: &[f64]) -> Mat {
        shifted(&self.a, lambda[0])
    }
    /// A shift that lands exactly on an eigenvalue is moved by a few ulps of
    /// `‖A‖` before giving up.
    fn solve_lx(&self, _x: &[f64], lambda: &[f64], rhs: &Mat) -> Result<Mat, LinalgError> {
        let lu = Lu::factor(&shifted(&self.a, lambda[0])).or_else(|_| {
            let nudge = SHIFT_NUDGE * self.a.norm_one().max(f64::MIN_POSITIVE);
            Lu::factor(&shifted(&self.a, lambda[0] + nudge))
        })?;
        lu.solve_mat(rhs)
    }
}

const SHIFT_NUDGE: f64 = 16.0 * f64::EPSILON;

fn shifted(a: &Mat, s: f64) -> Mat {
    let mut m = a.clone();
    for i in 0..m.rows() {
        m[(i, i)] -= s;
    }
    m
}

/// Normalization applied to eigenvectors.
#[derive(Clone, Debug)]
pub enum Normalization {
    /// `½(xᵀx - 1) = 0`.
    Sphere,
    /// `uᵀx = 1`.
    Linear(Vec<f64>),
}

/// Left inverse used for the Rayleigh quotient.
#[derive(Clone, Debug)]
pub enum LeftInverseChoice {
    /// `(xᵀx)⁻¹ xᵀ`.
    Gram,
    /// `(zᵀx)⁻¹ zᵀ` for a fixed `z`.
    Fixed(Vec<f64>),
}

/// Sphere or affine constraint.
#[derive(Clone, Debug)]
pub enum EigenConstraint {
    Sphere(SphereConstraint),
    Linear(AffineConstraint),
}

impl Constraint for EigenConstraint {
    fn dim(&self) -> usize {
        match self {
            EigenConstraint::Sphere(c) => c.dim(),
            EigenConstraint::Linear(c) => c.dim(),
        }
    }
    fn count(&self) -> usize {
        1
    }
    fn value(&self, x: &[f64]) -> Vec<f64> {
        match self {
            EigenConstraint::Sphere(c) => c.value(x),
            EigenConstraint::Linear(c) => c.value(x),
        }
    }
    fn jacobian(&self, x: &[f64]) -> Mat {
        match self {
            EigenConstraint::Sphere(c) => c.jacobian(x),
            EigenConstraint::Linear(c) => c.jacobian(x),
        }
    }
    fn second(&self, x: &[f64], eta: &[f64]) -> Option<Vec<f64>> {
        match self {
            EigenConstraint::Sphere(c) => c.second(x, eta),
            EigenConstraint::Linear(c) => c.second(x, eta),
        }
    }
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        match self {
            EigenConstraint::Sphere(c) => c.retract(x, eta),
            EigenConstraint::Linear(c) => c.retract(x, eta),
        }
    }
    fn retraction_order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

impl EigenConstraint {
    /// Maps a nonzero vector onto the constraint set.
    pub fn normalize(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            EigenConstraint::Sphere(_) => crate::linalg::normalized(x),
            EigenConstraint::Linear(c) => {
                let s = c.matrix().mul_vec(x)[0];
                if s.abs() < 1e-12 {
                    None
                } else {
                    Some(x.iter().map(|v| v / s).collect())
                }
            }
        }
    }
}

pub type MatrixEigenProblem = ExplicitProblem<MatrixEigen, Dagger, Dagger>;

/// Builds the eigenproblem for `A` with the chosen normalization and left inverse.
pub fn build_matrix_eigen(
    a: Mat,
    normalization: Normalization,
    left_inverse: LeftInverseChoice,
) -> Result<(MatrixEigenProblem, EigenConstraint), InstanceError> {
    let lag = MatrixEigen::new(a)?;
    let n = lag.dim();
    let constraint = match normalization {
        Normalization::Sphere => EigenConstraint::Sphere(SphereConstraint { dim: n }),
        Normalization::Linear(u) => {
            if u.len() != n {
                return Err(InstanceError::DimensionMismatch { expected: n, actual: u.len() });
            }
            EigenConstraint::Linear(
                AffineConstraint::normalizing(&u).map_err(|_| InstanceError::Invalid("zero normalization vector"))?,
            )
        }
    };
    let dagger = match left_inverse {
        LeftInverseChoice::Gram => Dagger::Gram,
        LeftInverseChoice::Fixed(z) => {
            if z.len() != n {
                return Err(InstanceError::DimensionMismatch { expected: n, actual: z.len() });
            }
            Dagger::Fixed(Mat::from_row_major(1, n, z).expect("row vector"))
        }
    };
    Ok((ExplicitProblem::with_dagger(lag, dagger), constraint))
}
