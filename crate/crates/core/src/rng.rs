//! Seeded random sampling helpers.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{normalized, Mat};

pub type SolverRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SolverRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn substream(seed: u64, stream: u64) -> SolverRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

pub fn normal_mat(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| normal(rng))
}

pub fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(s * normal(rng), s * normal(rng))
}

pub fn complex_normal_mat(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat<Complex64> {
    Mat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Uniform sample on the real unit sphere.
pub fn unit_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        if let Some(v) = normalized(&normal_vec(rng, n)) {
            return v;
        }
    }
}

/// Uniform sample on the unit sphere of complex n-space.
pub fn unit_complex_vector(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    loop {
        let z: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
        if let Some(v) = normalized(&z) {
            return v;
        }
    }
}

/// Symmetric matrix with standard normal upper triangle, scaled by `1/sqrt(n)`.
pub fn symmetric_matrix(rng: &mut impl Rng, n: usize) -> Mat<f64> {
    let s = 1.0 / libm::sqrt(n as f64);
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = s * normal(rng);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// Random orthogonal matrix (Q factor of a Gaussian matrix).
pub fn orthogonal_matrix(rng: &mut impl Rng, n: usize) -> Mat<f64> {
    crate::linalg::column_space(&normal_mat(rng, n, n))
}

/// Nonnormal matrix with real spectrum, `Q (D + N) Qᵀ` with `D` diagonal
/// normal and `N` strictly upper triangular, scaled by `1/sqrt(n)`.
pub fn nonnormal_matrix(rng: &mut impl Rng, n: usize) -> Mat<f64> {
    let s = 1.0 / libm::sqrt(n as f64);
    let d: Vec<f64> = normal_vec(rng, n);
    let t = Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 });
    let upper = Mat::from_fn(n, n, |i, j| if j > i { s * normal(rng) } else { 0.0 });
    let q = orthogonal_matrix(rng, n);
    q.matmul(&t.add(&upper)).matmul(&q.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = normal_vec(&mut substream(7, 3), 4);
        let b = normal_vec(&mut substream(7, 3), 4);
        let c = normal_vec(&mut substream(7, 4), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_samples_have_unit_norm() {
        let mut rng = seeded(1);
        assert!((norm(&unit_vector(&mut rng, 5)) - 1.0).abs() < 1e-15);
        assert!((norm(&unit_complex_vector(&mut rng, 5)) - 1.0).abs() < 1e-15);
    }
}
