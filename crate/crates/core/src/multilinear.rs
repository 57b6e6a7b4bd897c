//! Dense symmetric tensors and their contraction kernels.
//!
//! Entries are stored as a full row-major `n^m` array. Contractions repeatedly
//! fold the last index against a vector, so a real tensor can be applied to
//! complex vectors without complex storage.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::TensorError;
use crate::linalg::{Mat, Scalar};
use crate::rng::{normal, seeded};

/// Tolerance for the symmetry check on construction.
pub const SYMMETRY_TOL: f64 = 1e-13;

/// Order-`m`, dimension-`n` tensor invariant under index permutations.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

fn checked_len(order: usize, dim: usize) -> Option<usize> {
    dim.checked_pow(order as u32)
}

fn multi_index(mut flat: usize, order: usize, dim: usize, out: &mut [usize]) {
    for slot in (0..order).rev() {
        out[slot] = flat % dim;
        flat /= dim;
    }
}

fn flat_index(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

fn validate_shape(order: usize, dim: usize, len: usize) -> Result<(), TensorError> {
    if order < 2 || dim == 0 {
        return Err(TensorError::InvalidParameters { order, dim });
    }
    match checked_len(order, dim) {
        Some(expected) if expected == len => Ok(()),
        _ => Err(TensorError::InvalidShape { len, order, dim }),
    }
}

impl SymmetricTensor {
    /// Wraps entries that are already symmetric to within [`SYMMETRY_TOL`].
    pub fn new(order: usize, dim: usize, entries: Vec<f64>) -> Result<Self, TensorError> {
        validate_shape(order, dim, entries.len())?;
        let t = SymmetricTensor { order, dim, entries };
        let deviation = t.symmetry_deviation();
        let scale = t.entries.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if deviation > SYMMETRY_TOL * scale {
            return Err(TensorError::NotSymmetric { deviation });
        }
        Ok(t)
    }

    /// Averages `raw` over all index permutations.
    pub fn symmetrize(order: usize, dim: usize, raw: &[f64]) -> Result<Self, TensorError> {
        validate_shape(order, dim, raw.len())?;
        let len = raw.len();
        let mut sums = vec![0.0; len];
        let mut counts = vec![0usize; len];
        let mut idx = vec![0usize; order];
        let mut canon = vec![0usize; len];
        for (flat, &v) in raw.iter().enumerate() {
            multi_index(flat, order, dim, &mut idx);
            idx.sort_unstable();
            let key = flat_index(&idx, dim);
            canon[flat] = key;
            sums[key] += v;
            counts[key] += 1;
        }
        let entries = canon.iter().map(|&k| sums[k] / counts[k] as f64).collect();
        Ok(SymmetricTensor { order, dim, entries })
    }

    /// Standard normal entries, symmetrized. Deterministic in `seed`.
    pub fn random(order: usize, dim: usize, seed: u64) -> Result<Self, TensorError> {
        if order < 2 || dim == 0 {
            return Err(TensorError::InvalidParameters { order, dim });
        }
        let len = checked_len(order, dim).ok_or(TensorError::InvalidParameters { order, dim })?;
        let mut rng = seeded(seed);
        let raw: Vec<f64> = (0..len).map(|_| normal(&mut rng)).collect();
        Self::symmetrize(order, dim, &raw)
    }

    /// Diagonal tensor with `T[i,…,i] = d[i]`.
    pub fn diagonal(order: usize, d: &[f64]) -> Result<Self, TensorError> {
        let dim = d.len();
        let len = checked_len(order, dim).ok_or(TensorError::InvalidParameters { order, dim })?;
        validate_shape(order, dim, len)?;
        let mut entries = vec![0.0; len];
        for (i, &v) in d.iter().enumerate() {
            entries[flat_index(&vec![i; order], dim)] = v;
        }
        Ok(SymmetricTensor { order, dim, entries })
    }

    pub fn from_matrix(a: &Mat<f64>) -> Result<Self, TensorError> {
        Self::new(2, a.rows(), a.as_slice().to_vec())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[flat_index(idx, self.dim)]
    }

    /// Largest absolute difference between an entry and its sorted-index twin.
    pub fn symmetry_deviation(&self) -> f64 {
        let mut idx = vec![0usize; self.order];
        let mut worst = 0.0f64;
        for (flat, &v) in self.entries.iter().enumerate() {
            multi_index(flat, self.order, self.dim, &mut idx);
            idx.sort_unstable();
            let w = self.entries[flat_index(&idx, self.dim)];
            worst = worst.max((v - w).abs());
        }
        worst
    }

    /// Contracts copies of `x` into the last `m - free` slots. The result is
    /// the flat row-major array with `free` indices (`n^free` entries).
    pub fn sym_apply<S: Scalar>(&self, x: &[S], free: usize) -> Result<Vec<S>, TensorError> {
        if free > self.order {
            return Err(TensorError::TooManyFree { free, order: self.order });
        }
        let copies = vec![x; self.order - free];
        self.contract(&copies)
    }

    /// Contracts the given vectors into the trailing slots, the first vector
    /// going into the last slot.
    pub fn contract<S: Scalar>(&self, vectors: &[&[S]]) -> Result<Vec<S>, TensorError> {
        if vectors.len() > self.order {
            return Err(TensorError::TooManyFree { free: vectors.len(), order: self.order });
        }
        for v in vectors {
            if v.len() != self.dim {
                return Err(TensorError::DimensionMismatch { expected: self.dim, actual: v.len() });
            }
        }
        let n = self.dim;
        let Some((first, rest)) = vectors.split_first() else {
            return Ok(self.entries.iter().map(|&v| S::from_real(v)).collect());
        };
        let mut cur: Vec<S> = self
            .entries
            .chunks_exact(n)
            .map(|row| {
                let mut s = S::zero();
                for (&t, &xj) in row.iter().zip(first.iter()) {
                    s += S::from_real(t) * xj;
                }
                s
            })
            .collect();
        for v in rest {
            cur = cur
                .chunks_exact(n)
                .map(|row| {
                    let mut s = S::zero();
                    for (&t, &xj) in row.iter().zip(v.iter()) {
                        s += t * xj;
                    }
                    s
                })
                .collect();
        }
        Ok(cur)
    }

    /// `T(x, …, x)`.
    pub fn value<S: Scalar>(&self, x: &[S]) -> Result<S, TensorError> {
        Ok(self.sym_apply(x, 0)?[0])
    }

    /// `T(I, x, …, x)`.
    pub fn apply_vector<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, TensorError> {
        self.sym_apply(x, 1)
    }

    /// `T(I, I, x, …, x)` as an `n × n` matrix.
    pub fn apply_matrix<S: Scalar>(&self, x: &[S]) -> Result<Mat<S>, TensorError> {
        let data = self.sym_apply(x, 2)?;
        Ok(Mat::from_row_major(self.dim, self.dim, data).expect("n^2 entries"))
    }

    /// `l`-th derivative of `x ↦ T(I, x, …, x)` at `x`.
    pub fn derivative<S: Scalar>(&self, x: &[S], arity: usize) -> Result<MultiDerivative<S>, TensorError> {
        if arity + 1 > self.order {
            return Err(TensorError::TooManyFree { free: arity + 1, order: self.order });
        }
        let coef: f64 = (0..arity).map(|k| (self.order - 1 - k) as f64).product();
        let data = self.sym_apply(x, arity + 1)?;
        let data = data.into_iter().map(|v| v * S::from_real(coef)).collect();
        Ok(MultiDerivative { out_dim: self.dim, in_dim: self.dim, arity, data })
    }

    /// Second directional derivative `(m-1)(m-2) T(I, a, b, x, …, x)`.
    pub fn second_directional<S: Scalar>(&self, x: &[S], a: &[S], b: &[S]) -> Result<Vec<S>, TensorError> {
        let m = self.order;
        if m < 3 {
            return Ok(vec![S::zero(); self.dim]);
        }
        let mut vs: Vec<&[S]> = vec![x; m - 3];
        vs.push(b);
        vs.push(a);
        let coef = S::from_real(((m - 1) * (m - 2)) as f64);
        Ok(self.contract(&vs)?.into_iter().map(|v| v * coef).collect())
    }
}

/// Dense `l`-th derivative tensor of a map from `in_dim` to `out_dim`
/// coordinates, stored as `out_dim × in_dim^l` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiDerivative<S = f64> {
    out_dim: usize,
    in_dim: usize,
    arity: usize,
    data: Vec<S>,
}

impl<S: Scalar> MultiDerivative<S> {
    pub fn new(out_dim: usize, in_dim: usize, arity: usize, data: Vec<S>) -> Result<Self, TensorError> {
        let expected = out_dim * in_dim.pow(arity as u32);
        if data.len() != expected {
            return Err(TensorError::DimensionMismatch { expected, actual: data.len() });
        }
        Ok(MultiDerivative { out_dim, in_dim, arity, data })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    /// Contracts one vector into each input slot, yielding an output vector.
    pub fn apply(&self, vectors: &[&[S]]) -> Result<Vec<S>, TensorError> {
        if vectors.len() != self.arity {
            return Err(TensorError::DimensionMismatch { expected: self.arity, actual: vectors.len() });
        }
        let mut cur = self.data.clone();
        for v in vectors.iter().rev() {
            if v.len() != self.in_dim {
                return Err(TensorError::DimensionMismatch { expected: self.in_dim, actual: v.len() });
            }
            cur = cur
                .chunks_exact(self.in_dim)
                .map(|row| {
                    let mut s = S::zero();
                    for (&t, &xj) in row.iter().zip(v.iter()) {
                        s += t * xj;
                    }
                    s
                })
                .collect();
        }
        Ok(cur)
    }

    /// Largest deviation from symmetry across the input slots.
    pub fn input_symmetry_deviation(&self) -> f64 {
        let block = self.in_dim.pow(self.arity as u32);
        let mut idx = vec![0usize; self.arity];
        let mut worst = 0.0f64;
        for o in 0..self.out_dim {
            for k in 0..block {
                multi_index(k, self.arity, self.in_dim, &mut idx);
                idx.sort_unstable();
                let k2 = flat_index(&idx, self.in_dim);
                let d = (self.data[o * block + k] - self.data[o * block + k2]).modulus();
                worst = worst.max(d);
            }
        }
        worst
    }
}
