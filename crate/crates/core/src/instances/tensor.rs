//! Symmetric tensor eigenpairs `T(I, x, …, x) = λ x` over the reals and over
//! the complex numbers (split layout, real `λ`).

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::constraints::SphereConstraint;
use crate::error::{InstanceError, LinalgError};
use crate::linalg::{complexify_vector, realify_matrix, realify_vector, Lu, Mat};
use crate::model::{ExplicitLagrangian, ExplicitProblem};
use crate::multilinear::SymmetricTensor;

/// Real tensor eigenproblem: `F(x) = T(I, x, …, x)`, `H(x) = x`.
#[derive(Clone, Debug)]
pub struct TensorEigen {
    tensor: SymmetricTensor,
}

impl TensorEigen {
    pub fn new(tensor: SymmetricTensor) -> Result<Self, InstanceError> {
        if tensor.order() < 3 {
            return Err(InstanceError::Invalid("tensor order must be at least 3"));
        }
        Ok(TensorEigen { tensor })
    }

    pub fn tensor(&self) -> &SymmetricTensor {
        &self.tensor
    }

    fn jacobian_f(&self, x: &[f64]) -> Mat {
        let m = self.tensor.order() as f64;
        self.tensor.apply_matrix(x).expect("validated dimension").scale(m - 1.0)
    }
}

impl ExplicitLagrangian for TensorEigen {
    fn dim(&self) -> usize {
        self.tensor.dim()
    }
    fn dim_lambda(&self) -> usize {
        1
    }
    fn f(&self, x: &[f64]) -> Vec<f64> {
        self.tensor.apply_vector(x).expect("validated dimension")
    }
    fn h(&self, x: &[f64]) -> Mat {
        Mat::column_vector(x)
    }
    fn jf(&self, x: &[f64]) -> Mat {
        self.jacobian_f(x)
    }
    fn jh(&self, _x: &[f64], eta: &[f64]) -> Mat {
        Mat::column_vector(eta)
    }
    fn j2f(&self, x: &[f64], eta: &[f64]) -> Option<Vec<f64>> {
        self.tensor.second_directional(x, eta, eta).ok()
    }
    fn j2h(&self, x: &[f64], _eta: &[f64]) -> Option<Mat> {
        Some(Mat::zeros(x.len(), 1))
    }
    fn has_second_derivatives(&self) -> bool {
        true
    }
    fn lx(&self, x: &[f64], lambda: &[f64]) -> Mat {
        let mut m = self.jacobian_f(x);
        for i in 0..m.rows() {
            m[(i, i)] -= lambda[0];
        }
        m
    }
}

/// Complex tensor eigenproblem in split layout `[Re z; Im z]` with real `λ`.
///
/// `F` is holomorphic, so its real Jacobian is the realification of
/// `(m-1) T(I, I, z, …, z)` and `Lx` is solved in complex arithmetic.
#[derive(Clone, Debug)]
pub struct ComplexTensorEigen {
    tensor: SymmetricTensor,
}

impl ComplexTensorEigen {
    pub fn new(tensor: SymmetricTensor) -> Result<Self, InstanceError> {
        if tensor.order() < 3 {
            return Err(InstanceError::Invalid("tensor order must be at least 3"));
        }
        Ok(ComplexTensorEigen { tensor })
    }

    pub fn tensor(&self) -> &SymmetricTensor {
        &self.tensor
    }

    fn complex_lx(&self, x: &[f64], lambda: f64) -> Mat<Complex64> {
        let z = complexify_vector(x);
        let m = self.tensor.order() as f64;
        let mut a = self.tensor.apply_matrix(&z).expect("validated dimension").scale(Complex64::new(m - 1.0, 0.0));
        for i in 0..a.rows() {
            a[(i, i)] -= Complex64::new(lambda, 0.0);
        }
        a
    }
}

impl ExplicitLagrangian for ComplexTensorEigen {
    fn dim(&self) -> usize {
        2 * self.tensor.dim()
    }
    fn dim_lambda(&self) -> usize {
        1
    }
    fn f(&self, x: &[f64]) -> Vec<f64> {
        let z = complexify_vector(x);
        realify_vector(&self.tensor.apply_vector(&z).expect("validated dimension"))
    }
    fn h(&self, x: &[f64]) -> Mat {
        Mat::column_vector(x)
    }
    fn jf(&self, x: &[f64]) -> Mat {
        realify_matrix(&self.complex_lx(x, 0.0))
    }
    fn jh(&self, _x: &[f64], eta: &[f64]) -> Mat {
        Mat::column_vector(eta)
    }
    fn j2f(&self, x: &[f64], eta: &[f64]) -> Option<Vec<f64>> {
        let z = complexify_vector(x);
        let e = complexify_vector(eta);
        self.tensor.second_directional(&z, &e, &e).ok().map(|v| realify_vector(&v))
    }
    fn j2h(&self, x: &[f64], _eta: &[f64]) -> Option<Mat> {
        Some(Mat::zeros(x.len(), 1))
    }
    fn has_second_derivatives(&self) -> bool {
        true
    }
    fn lx(&self, x: &[f64], lambda: &[f64]) -> Mat {
        realify_matrix(&self.complex_lx(x, lambda[0]))
    }
    fn solve_lx(&self, x: &[f64], lambda: &[f64], rhs: &Mat) -> Result<Mat, LinalgError> {
        let lu = Lu::factor(&self.complex_lx(x, lambda[0]))?;
        let cols: Vec<Vec<f64>> = rhs
            .columns()
            .iter()
            .map(|c| lu.solve(&complexify_vector(c)).map(|s| realify_vector(&s)))
            .collect::<Result<_, _>>()?;
        Ok(Mat::from_columns(rhs.rows(), &cols))
    }
}

pub type TensorProblem = ExplicitProblem<TensorEigen>;
pub type ComplexTensorProblem = ExplicitProblem<ComplexTensorEigen>;

/// Real tensor eigenproblem on the unit sphere.
pub fn build_tensor_real(tensor: SymmetricTensor) -> Result<(TensorProblem, SphereConstraint), InstanceError> {
    let n = tensor.dim();
    Ok((ExplicitProblem::gram(TensorEigen::new(tensor)?), SphereConstraint { dim: n }))
}

/// Complex tensor eigenproblem on the unit sphere of complex space. The Gram
/// left inverse in split layout is `w ↦ Re(z*w) / (z*z)`.
pub fn build_tensor_complex(tensor: SymmetricTensor) -> Result<(ComplexTensorProblem, SphereConstraint), InstanceError> {
    let n = tensor.dim();
    Ok((ExplicitProblem::gram(ComplexTensorEigen::new(tensor)?), SphereConstraint { dim: 2 * n }))
}

/// `‖T(I, z, …, z) - λ z‖` for a complex vector.
pub fn complex_eigen_residual(tensor: &SymmetricTensor, z: &[Complex64], lambda: Complex64) -> f64 {
    let f = tensor.apply_vector(z).expect("matching dimension");
    let r: Vec<Complex64> = f.iter().zip(z).map(|(a, b)| a - lambda * b).collect();
    crate::linalg::norm(&r)
}

/// `‖T(I, x, …, x) - λ x‖` for a real vector.
pub fn real_eigen_residual(tensor: &SymmetricTensor, x: &[f64], lambda: f64) -> f64 {
    let f = tensor.apply_vector(x).expect("matching dimension");
    let r: Vec<f64> = f.iter().zip(x).map(|(a, b)| a - lambda * b).collect();
    crate::linalg::norm(&r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::linalg::{norm, normalized, sub};
    use crate::model::{fd_check_explicit, Derivative, GeneralLagrangian};
    use crate::rng::{normal_vec, seeded, unit_complex_vector, unit_vector};
    use crate::solver::{rqi_schur, rqi_tangent, SolverConfig};

    #[test]
    fn diagonal_tensor_basis_vectors_are_fixed_points() {
        let t = SymmetricTensor::diagonal(3, &[1.5, -2.0, 0.5]).unwrap();
        let (p, c) = build_tensor_real(t).unwrap();
        for (i, d) in [1.5, -2.0, 0.5].iter().enumerate() {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            let r = rqi_schur(&p, &c, &e, &SolverConfig::default()).unwrap();
            assert!(r.converged);
            assert_eq!(r.iterations, 0);
            assert!((r.lambda[0] - d).abs() < 1e-15);
        }
    }

    #[test]
    fn real_derivatives_match_fd() {
        let t = SymmetricTensor::random(4, 4, 3).unwrap();
        let lag = TensorEigen::new(t).unwrap();
        let mut rng = seeded(1);
        let x = unit_vector(&mut rng, 4);
        let d = normal_vec(&mut rng, 4);
        for w in [Derivative::JF, Derivative::JH, Derivative::J2F, Derivative::J2H, Derivative::Lx] {
            assert!(fd_check_explicit(&lag, &x, &[0.3], &d, w).unwrap() < 1e-6, "{w:?}");
        }
    }

    #[test]
    fn complex_derivatives_match_fd() {
        let t = SymmetricTensor::random(3, 3, 5).unwrap();
        let lag = ComplexTensorEigen::new(t).unwrap();
        let mut rng = seeded(2);
        let x = realify_vector(&unit_complex_vector(&mut rng, 3));
        let d = normal_vec(&mut rng, 6);
        for w in [Derivative::JF, Derivative::JH, Derivative::J2F, Derivative::J2H, Derivative::Lx] {
            assert!(fd_check_explicit(&lag, &x, &[0.3], &d, w).unwrap() < 1e-6, "{w:?}");
        }
        let rhs = Mat::from_fn(6, 2, |i, j| (i + 3 * j) as f64 - 2.5);
        let a = lag.solve_lx(&x, &[0.3], &rhs).unwrap();
        assert!(lag.lx(&x, &[0.3]).matmul(&a).sub(&rhs).norm_fro() < 1e-10);
    }

    #[test]
    fn real_pair_is_fixed_point_of_complex_iteration() {
        let t = SymmetricTensor::random(3, 4, 11).unwrap();
        let (p, c) = build_tensor_real(t.clone()).unwrap();
        let x0 = unit_vector(&mut seeded(4), 4);
        let r = rqi_schur(&p, &c, &x0, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        let (pc, cc) = build_tensor_complex(t).unwrap();
        let mut z = r.x.clone();
        z.extend(vec![0.0; 4]);
        let rc = rqi_schur(&pc, &cc, &z, &SolverConfig::default()).unwrap();
        assert!(rc.converged && rc.iterations == 0);
        assert!((rc.lambda[0] - r.lambda[0]).abs() < 1e-12);
    }

    #[test]
    fn schur_and_tangent_find_the_same_pair() {
        let t = SymmetricTensor::random(4, 5, 17).unwrap();
        let (p, c) = build_tensor_real(t).unwrap();
        let x0 = unit_vector(&mut seeded(6), 5);
        let a = rqi_schur(&p, &c, &x0, &SolverConfig::default()).unwrap();
        let b = rqi_tangent(&p, &c, &x0, &SolverConfig::default()).unwrap();
        assert!(a.converged && b.converged);
        assert!((a.lambda[0] - b.lambda[0]).abs() < 1e-10);
        let s = if crate::linalg::dot(&a.x, &b.x) < 0.0 { -1.0 } else { 1.0 };
        assert!(norm(&sub(&a.x, &crate::linalg::scaled(s, &b.x))) < 1e-8);
    }

    /// All-ones order-3 tensor in the plane: sweep the angle and locate zeros
    /// of `cross(F(x), x)` by bisection.
    #[test]
    fn all_ones_pairs_match_angle_sweep() {
        let t = SymmetricTensor::new(3, 2, vec![1.0; 8]).unwrap();
        let cross = |th: f64| {
            let x = [th.cos(), th.sin()];
            let f = t.apply_vector(&x).unwrap();
            f[0] * x[1] - f[1] * x[0]
        };
        let mut roots = Vec::new();
        let steps = 4000;
        let pi = core::f64::consts::PI;
        for k in 0..steps {
            let (mut a, mut b) = (pi * k as f64 / steps as f64, pi * (k + 1) as f64 / steps as f64);
            if cross(a) == 0.0 {
                roots.push(a);
                continue;
            }
            if cross(a) * cross(b) < 0.0 {
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    if cross(a) * cross(m) <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        let (p, c) = build_tensor_real(t.clone()).unwrap();
        let x = normalized(&[1.0, 1.0]).unwrap();
        let lam = p.rayleigh(&x, None).unwrap()[0];
        assert!((lam - 2.0 * core::f64::consts::SQRT_2).abs() < 1e-14);
        for th in roots {
            let x = [th.cos(), th.sin()];
            let r = rqi_schur(&p, &c, &x, &SolverConfig::default()).unwrap();
            assert!(r.converged && r.iterations <= 2, "{r:?}");
            assert!(real_eigen_residual(&t, &r.x, r.lambda[0]) < 1e-12);
        }
    }
}
