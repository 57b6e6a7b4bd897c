//! Common equality constraints.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{LinalgError, RetractionError};
use crate::linalg::{add, complexify_vector, dot, dotc, realify_vector, Lu, Mat, Scalar};
use crate::model::{Constraint, RetractionOrder};
use crate::retraction::sphere_retract;

/// `½(xᵀx - 1) = 0`. Also the unit sphere of complex space in split layout.
#[derive(Clone, Copy, Debug)]
pub struct SphereConstraint {
    pub dim: usize,
}

impl Constraint for SphereConstraint {
    fn dim(&self) -> usize {
        self.dim
    }
    fn count(&self) -> usize {
        1
    }
    fn value(&self, x: &[f64]) -> Vec<f64> {
        vec![0.5 * (dot(x, x) - 1.0)]
    }
    fn jacobian(&self, x: &[f64]) -> Mat {
        Mat::from_row_major(1, x.len(), x.to_vec()).expect("row vector")
    }
    fn second(&self, _x: &[f64], eta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![dot(eta, eta)])
    }
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        sphere_retract(x, eta)
    }
    fn retraction_order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

/// `U x - c = 0`, retracted by orthogonal projection onto the affine set.
#[derive(Clone, Debug)]
pub struct AffineConstraint {
    u: Mat,
    c: Vec<f64>,
    gram: Lu,
}

impl AffineConstraint {
    pub fn new(u: Mat, c: Vec<f64>) -> Result<Self, LinalgError> {
        if c.len() != u.rows() {
            return Err(LinalgError::DimensionMismatch { expected: u.rows(), actual: c.len() });
        }
        let gram = Lu::factor(&u.matmul(&u.transpose()))?;
        Ok(AffineConstraint { u, c, gram })
    }

    /// Single real equation `uᵀx = 1`.
    pub fn normalizing(u: &[f64]) -> Result<Self, LinalgError> {
        Self::new(Mat::from_row_major(1, u.len(), u.to_vec())?, vec![1.0])
    }

    /// Complex equation `u*z = 1` in split layout (two real rows).
    pub fn complex_normalizing(u: &[Complex64]) -> Result<Self, LinalgError> {
        let n = u.len();
        let rows = Mat::from_fn(2, 2 * n, |r, j| {
            let (k, imag_block) = (j % n, j >= n);
            match (r, imag_block) {
                (0, false) => u[k].re,
                (0, true) => u[k].im,
                (_, false) => -u[k].im,
                (_, true) => u[k].re,
            }
        });
        Self::new(rows, vec![1.0, 0.0])
    }

    /// Orthogonal projection of `y` onto the affine set.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let r: Vec<f64> = self.u.mul_vec(y).iter().zip(&self.c).map(|(a, b)| a - b).collect();
        let s = self.gram.solve(&r)?;
        let corr = self.u.tr_mul_vec(&s);
        Ok(y.iter().zip(&corr).map(|(a, b)| a - b).collect())
    }

    pub fn matrix(&self) -> &Mat {
        &self.u
    }
}

impl Constraint for AffineConstraint {
    fn dim(&self) -> usize {
        self.u.cols()
    }
    fn count(&self) -> usize {
        self.u.rows()
    }
    fn value(&self, x: &[f64]) -> Vec<f64> {
        self.u.mul_vec(x).iter().zip(&self.c).map(|(a, b)| a - b).collect()
    }
    fn jacobian(&self, _x: &[f64]) -> Mat {
        self.u.clone()
    }
    fn second(&self, _x: &[f64], _eta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; self.u.rows()])
    }
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        self.project(&add(x, eta)).map_err(|_| RetractionError::RankDeficient)
    }
    fn retraction_order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

/// Complex unit sphere with the phase fixed by `Im(w*z) = 0`, in split layout.
///
/// Equations: `½(z*z - 1)` and `Im(w*z)`. The retraction normalizes and then
/// rotates so that `w*z` is real and positive.
#[derive(Clone, Debug)]
pub struct GaugedComplexSphere {
    w: Vec<Complex64>,
}

impl GaugedComplexSphere {
    pub fn new(w: Vec<Complex64>) -> Self {
        GaugedComplexSphere { w }
    }

    /// Rotates `z` so that `w*z` is real and non-negative.
    pub fn fix_phase(&self, z: &[f64]) -> Vec<f64> {
        let zc = complexify_vector(z);
        let phase = dotc(&self.w, &zc).unit_phase().conj();
        realify_vector(&zc.iter().map(|v| v * phase).collect::<Vec<_>>())
    }
}

impl Constraint for GaugedComplexSphere {
    fn dim(&self) -> usize {
        2 * self.w.len()
    }
    fn count(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> Vec<f64> {
        let z = complexify_vector(x);
        vec![0.5 * (dot(x, x) - 1.0), dotc(&self.w, &z).im]
    }
    fn jacobian(&self, x: &[f64]) -> Mat {
        let n = self.w.len();
        Mat::from_fn(2, 2 * n, |r, j| {
            if r == 0 {
                x[j]
            } else if j < n {
                -self.w[j].im
            } else {
                self.w[j - n].re
            }
        })
    }
    fn second(&self, _x: &[f64], eta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![dot(eta, eta), 0.0])
    }
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        Ok(self.fix_phase(&sphere_retract(x, eta)?))
    }
    fn retraction_order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::model::{fd_check_constraint, Derivative};
    use crate::rng::{normal_vec, seeded, unit_complex_vector};

    #[test]
    fn sphere_derivatives() {
        let c = SphereConstraint { dim: 3 };
        let x = [0.3, -0.2, 0.9];
        let d = [1.0, 0.5, -0.25];
        assert!(fd_check_constraint(&c, &x, &d, Derivative::JC).unwrap() < 1e-7);
        assert!(fd_check_constraint(&c, &x, &d, Derivative::J2C).unwrap() < 1e-7);
    }

    #[test]
    fn affine_retraction_is_exact() {
        let c = AffineConstraint::normalizing(&[1.0, 2.0, 0.0]).unwrap();
        let x = [1.0, 0.0, 0.0];
        let y = c.retract(&x, &[0.2, 0.3, -1.0]).unwrap();
        assert!(c.value(&y)[0].abs() < 1e-15);
        let tangent = [2.0, -1.0, 0.5];
        let z = c.retract(&x, &tangent).unwrap();
        assert!(norm(&crate::linalg::sub(&z, &add(&x, &tangent))) < 1e-15);
    }

    #[test]
    fn complex_affine_matches_inner_product() {
        let mut rng = seeded(2);
        let u = unit_complex_vector(&mut rng, 3);
        let c = AffineConstraint::complex_normalizing(&u).unwrap();
        let z = realify_vector(&unit_complex_vector(&mut rng, 3));
        let direct = dotc(&u, &complexify_vector(&z));
        let v = c.value(&z);
        assert!((v[0] - (direct.re - 1.0)).abs() < 1e-15);
        assert!((v[1] - direct.im).abs() < 1e-15);
    }

    #[test]
    fn gauged_sphere_retraction_is_feasible() {
        let mut rng = seeded(7);
        let w = unit_complex_vector(&mut rng, 4);
        let c = GaugedComplexSphere::new(w.clone());
        let x0 = realify_vector(&w);
        let x = c.retract(&x0, &[0.0; 8]).unwrap();
        for _ in 0..10 {
            let eta: Vec<f64> = normal_vec(&mut rng, 8).iter().map(|v| 0.1 * v).collect();
            let y = c.retract(&x, &eta).unwrap();
            assert!(norm(&c.value(&y)) < 1e-14);
        }
        let d = normal_vec(&mut rng, 8);
        assert!(fd_check_constraint(&c, &x, &d, Derivative::JC).unwrap() < 1e-7);
        assert!(fd_check_constraint(&c, &x, &d, Derivative::J2C).unwrap() < 1e-7);
    }
}
