//! Dense linear algebra over real and complex scalars.
//!
//! Row-major matrices, LU with partial pivoting and a 1-norm condition
//! estimate, Householder null-space bases, and a Jacobi symmetric eigensolver.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::LinalgError;

/// Field element usable by the dense kernels.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(v: f64) -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    fn real(self) -> f64;
    fn is_finite_value(self) -> bool;
    /// `self / |self|`, or one when zero.
    fn unit_phase(self) -> Self {
        let m = self.modulus();
        if m == 0.0 {
            Self::one()
        } else {
            self * Self::from_real(1.0 / m)
        }
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(v: f64) -> Self {
        v
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        libm::fabs(self)
    }
    fn real(self) -> f64 {
        self
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        libm::hypot(self.re, self.im)
    }
    fn real(self) -> f64 {
        self.re
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Builds from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch { expected: rows * cols, actual: data.len() });
        }
        Ok(Mat { rows, cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        let cols = columns.len();
        Self::from_fn(rows, cols, |i, j| columns[j][i])
    }

    pub fn column_vector(v: &[T]) -> Self {
        Mat { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[T]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut s = T::zero();
                for (a, &b) in self.row(i).iter().zip(x) {
                    s += *a * b;
                }
                s
            })
            .collect()
    }

    /// `Aᵀ x` without conjugation.
    pub fn tr_mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows, "transpose-vector dimension mismatch");
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat<T>) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &Mat<T>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Mat<T>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn norm_fro(&self) -> f64 {
        norm(&self.data)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hstack(&self, other: &Mat<T>) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        })
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// `Σ conj(aᵢ) bᵢ`.
pub fn dotc<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        s += x.conj() * y;
    }
    s
}

pub fn norm<T: Scalar>(a: &[T]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.modulus()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = a
        .iter()
        .map(|v| {
            let r = v.modulus() / scale;
            r * r
        })
        .sum();
    scale * libm::sqrt(s)
}

pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled<T: Scalar>(alpha: T, x: &[T]) -> Vec<T> {
    x.iter().map(|&v| alpha * v).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Returns `x / ‖x‖`, or `None` for a zero vector.
pub fn normalized<T: Scalar>(x: &[T]) -> Option<Vec<T>> {
    let n = norm(x);
    if n == 0.0 || !n.is_finite() {
        None
    } else {
        Some(scaled(T::from_real(1.0 / n), x))
    }
}

/// LU factorization `P A = L U` with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T = f64> {
    n: usize,
    lu: Mat<T>,
    perm: Vec<usize>,
    anorm: f64,
}

/// Pivots at or below this magnitude count as an exact breakdown.
const PIVOT_FLOOR: f64 = 1e-300;

impl<T: Scalar> Lu<T> {
    pub fn factor(a: &Mat<T>) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let n = a.rows();
        let anorm = a.norm_one();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].modulus();
            for i in k + 1..n {
                let v = lu[(i, k)].modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > PIVOT_FLOOR) || !best.is_finite() {
                return Err(LinalgError::Singular { index: k });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Lu { n, lu, perm, anorm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, LinalgError> {
        if b.len() != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, actual: b.len() });
        }
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        if x.iter().all(|v| v.is_finite_value()) {
            Ok(x)
        } else {
            Err(LinalgError::NonFinite)
        }
    }

    /// Solves `Aᴴ y = b`.
    pub fn solve_adjoint(&self, b: &[T]) -> Result<Vec<T>, LinalgError> {
        if b.len() != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, actual: b.len() });
        }
        let n = self.n;
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[(j, i)].conj() * w[j];
            }
            w[i] = s / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)].conj() * w[j];
            }
            w[i] = s;
        }
        let mut y = vec![T::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = w[k];
        }
        if y.iter().all(|v| v.is_finite_value()) {
            Ok(y)
        } else {
            Err(LinalgError::NonFinite)
        }
    }

    /// Solves `A X = B` column by column.
    pub fn solve_mat(&self, b: &Mat<T>) -> Result<Mat<T>, LinalgError> {
        if b.rows() != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, actual: b.rows() });
        }
        let mut out = Mat::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.column(j))?;
            out.set_column(j, &x);
        }
        Ok(out)
    }

    /// Hager-Higham estimate of the 1-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![T::from_real(1.0 / n as f64); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = match self.solve(&x) {
                Ok(y) => y,
                Err(_) => return f64::INFINITY,
            };
            est = y.iter().map(|v| v.modulus()).sum::<f64>();
            let xi: Vec<T> = y.iter().map(|v| v.unit_phase()).collect();
            let z = match self.solve_adjoint(&xi) {
                Ok(z) => z,
                Err(_) => return f64::INFINITY,
            };
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.modulus()))
                .fold((0, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
            if zmax <= dotc(&z, &x).real() {
                break;
            }
            x = vec![T::zero(); n];
            x[jmax] = T::one();
        }
        est * self.anorm
    }
}

/// Splits a complex vector into `[re; im]`.
pub fn realify_vector(z: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * z.len());
    out.extend(z.iter().map(|c| c.re));
    out.extend(z.iter().map(|c| c.im));
    out
}

/// Inverse of [`realify_vector`].
pub fn complexify_vector(v: &[f64]) -> Vec<Complex64> {
    let n = v.len() / 2;
    (0..n).map(|i| Complex64::new(v[i], v[n + i])).collect()
}

/// Real representation `[[Re M, -Im M], [Im M, Re M]]` of a complex-linear map.
pub fn realify_matrix(m: &Mat<Complex64>) -> Mat<f64> {
    let (r, c) = (m.rows(), m.cols());
    Mat::from_fn(2 * r, 2 * c, |i, j| {
        let v = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

/// Recovers a complex matrix from a realified complex-linear map.
pub fn complexify_matrix(m: &Mat<f64>) -> Mat<Complex64> {
    let (r, c) = (m.rows() / 2, m.cols() / 2);
    Mat::from_fn(r, c, |i, j| Complex64::new(m[(i, j)], m[(r + i, j)]))
}

/// Orthonormal basis of the null space of `a` (columns), via Householder QR
/// of `aᵀ` with column pivoting. Rank is decided relative to the largest
/// diagonal of R.
pub fn null_space(a: &Mat<f64>) -> Mat<f64> {
    let (q, rank) = householder_q(&a.transpose());
    let n = a.cols();
    Mat::from_fn(n, n - rank, |i, j| q[(i, rank + j)])
}

/// Orthonormal basis of the column space of `a`.
pub fn column_space(a: &Mat<f64>) -> Mat<f64> {
    let (q, rank) = householder_q(a);
    Mat::from_fn(a.rows(), rank, |i, j| q[(i, j)])
}

/// Full orthogonal `Q` from a pivoted Householder QR of `a`, and the numerical rank.
fn householder_q(a: &Mat<f64>) -> (Mat<f64>, usize) {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut col_norms: Vec<f64> = (0..n).map(|j| norm(&r.column(j))).collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::new();
    let steps = m.min(n);
    let mut diag = Vec::with_capacity(steps);
    for k in 0..steps {
        // deterministic pivot: largest remaining norm, lowest index on ties
        let mut p = k;
        for j in k + 1..n {
            if col_norms[j] > col_norms[p] {
                p = j;
            }
        }
        if p != k {
            col_norms.swap(p, k);
            for i in 0..m {
                let t = r[(i, k)];
                r[(i, k)] = r[(i, p)];
                r[(i, p)] = t;
            }
        }
        let x: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = norm(&x);
        let mut v = x.clone();
        let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vn = norm(&v);
        if vn > 0.0 {
            for vi in v.iter_mut() {
                *vi /= vn;
            }
            for j in k..n {
                let s: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
                for i in k..m {
                    r[(i, j)] -= 2.0 * v[i - k] * s;
                }
            }
        }
        diag.push(libm::fabs(r[(k, k)]));
        for j in k + 1..n {
            let tail: Vec<f64> = (k + 1..m).map(|i| r[(i, j)]).collect();
            col_norms[j] = norm(&tail);
        }
        reflectors.push(v);
    }
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let tol = dmax * (m.max(n) as f64) * f64::EPSILON * 10.0;
    let rank = diag.iter().take_while(|&&d| d > tol && dmax > 0.0).count();
    let mut q = Mat::identity(m);
    for (k, v) in reflectors.iter().enumerate().rev() {
        for j in 0..m {
            let s: f64 = (k..m).map(|i| v[i - k] * q[(i, j)]).sum();
            for i in k..m {
                q[(i, j)] -= 2.0 * v[i - k] * s;
            }
        }
    }
    (q, rank)
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi sweeps.
/// Returns eigenvalues and column eigenvectors.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let total: f64 = m.as_slice().iter().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            let vals = (0..n).map(|i| m[(i, i)]).collect();
            return Ok((vals, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(LinalgError::NoConvergence)
}

/// `S^{-1/2}` for a symmetric positive definite `S`.
pub fn inverse_sqrt_spd(s: &Mat<f64>) -> Result<Mat<f64>, LinalgError> {
    let (vals, vecs) = symmetric_eigen(s)?;
    let vmax = vals.iter().cloned().fold(0.0, f64::max);
    for (i, &w) in vals.iter().enumerate() {
        if !(w > vmax * 1e-28) {
            return Err(LinalgError::Singular { index: i });
        }
    }
    let n = s.rows();
    Ok(Mat::from_fn(n, n, |i, j| {
        (0..n).map(|k| vecs[(i, k)] * vecs[(j, k)] / libm::sqrt(vals[k])).sum()
    }))
}

/// Solves a small dense system in one call.
pub fn solve<T: Scalar>(a: &Mat<T>, b: &[T]) -> Result<Vec<T>, LinalgError> {
    Lu::factor(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Mat<f64> {
        Mat::from_row_major(3, 3, vec![4.0, 1.0, 2.0, 1.0, 5.0, 0.5, 2.0, -1.0, 3.0]).unwrap()
    }

    #[test]
    fn lu_solves_and_adjoint_solves() {
        let a = sample();
        let b = vec![1.0, 2.0, 3.0];
        let lu = Lu::factor(&a).unwrap();
        let x = lu.solve(&b).unwrap();
        let r = sub(&a.mul_vec(&x), &b);
        assert!(norm(&r) < 1e-14);
        let y = lu.solve_adjoint(&b).unwrap();
        let r = sub(&a.tr_mul_vec(&y), &b);
        assert!(norm(&r) < 1e-14);
    }

    #[test]
    fn complex_lu_adjoint() {
        let a = Mat::from_fn(3, 3, |i, j| Complex64::new((i + 2 * j) as f64 + 1.0, (i * j) as f64 - 0.5));
        let a = a.add(&Mat::identity(3).scale(Complex64::new(3.0, 0.0)));
        let b: Vec<Complex64> = (0..3).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let lu = Lu::factor(&a).unwrap();
        let y = lu.solve_adjoint(&b).unwrap();
        assert!(norm(&sub(&a.adjoint().mul_vec(&y), &b)) < 1e-12);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Mat::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(Lu::factor(&a), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn condition_estimate_of_diagonal() {
        let a = Mat::diagonal(&[1.0, 1e-3, 10.0]);
        let c = Lu::factor(&a).unwrap().condition_estimate();
        assert!((c - 1e4).abs() < 1e-6);
    }

    #[test]
    fn null_space_is_orthonormal_and_annihilated() {
        let a = Mat::from_row_major(2, 4, vec![1.0, 2.0, 0.0, 1.0, 0.0, 1.0, 1.0, -1.0]).unwrap();
        let u = null_space(&a);
        assert_eq!((u.rows(), u.cols()), (4, 2));
        assert!(a.matmul(&u).norm_fro() < 1e-14);
        let g = u.transpose().matmul(&u).sub(&Mat::identity(2));
        assert!(g.norm_fro() < 1e-14);
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = Mat::from_row_major(3, 3, vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]).unwrap();
        let (w, v) = symmetric_eigen(&a).unwrap();
        let rec = v.matmul(&Mat::diagonal(&w)).matmul(&v.transpose());
        assert!(rec.sub(&a).norm_fro() < 1e-13);
    }

    #[test]
    fn realify_round_trip() {
        let m = Mat::from_fn(2, 3, |i, j| Complex64::new(i as f64 + 0.5, j as f64 - 1.0));
        let z: Vec<Complex64> = (0..3).map(|k| Complex64::new(k as f64, 2.0 - k as f64)).collect();
        let direct = realify_vector(&m.mul_vec(&z));
        let via = realify_matrix(&m).mul_vec(&realify_vector(&z));
        assert!(norm(&sub(&direct, &via)) < 1e-14);
        assert_eq!(complexify_matrix(&realify_matrix(&m)), m);
    }

    #[test]
    fn inverse_sqrt_matches() {
        let s = Mat::from_row_major(2, 2, vec![2.0, 0.5, 0.5, 1.0]).unwrap();
        let r = inverse_sqrt_spd(&s).unwrap();
        let back = r.matmul(&s).matmul(&r);
        assert!(back.sub(&Mat::identity(2)).norm_fro() < 1e-13);
    }
}
