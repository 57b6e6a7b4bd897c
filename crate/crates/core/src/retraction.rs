//! Retractions onto constraint sets.

use alloc::vec::Vec;

use crate::error::RetractionError;
use crate::linalg::{add, inverse_sqrt_spd, norm, scaled, Mat};
use crate::model::RetractionOrder;

/// Smallest admissible `‖x + η‖` for the sphere retraction.
pub const DEGENERATE_NORM: f64 = 1e-14;

pub trait Retraction {
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError>;
    fn order(&self) -> RetractionOrder;
}

/// `(x + η) / ‖x + η‖`.
pub fn sphere_retract(x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
    let y = add(x, eta);
    let n = norm(&y);
    if !(n >= DEGENERATE_NORM) {
        return Err(RetractionError::DegenerateStep { norm: n });
    }
    Ok(scaled(1.0 / n, &y))
}

/// Polar retraction `(x + η)((x + η)ᵀ(x + η))^{-1/2}` for row-major `n × p` matrices.
pub fn stiefel_retract(x: &[f64], eta: &[f64], n: usize, p: usize) -> Result<Vec<f64>, RetractionError> {
    let y = Mat::from_row_major(n, p, add(x, eta)).map_err(|_| RetractionError::RankDeficient)?;
    let gram = y.transpose().matmul(&y);
    let inv = inverse_sqrt_spd(&gram).map_err(|_| RetractionError::RankDeficient)?;
    Ok(y.matmul(&inv).into_vec())
}

/// Constraint written as `x[free + i] = c_i(x[..free])`.
pub trait SolvedForm {
    fn free_dim(&self) -> usize;
    fn dependent(&self, free: &[f64]) -> Vec<f64>;
}

/// Moves the free block by `η` and recomputes the dependent coordinates.
pub fn orthographic_graph_retract<S: SolvedForm + ?Sized>(x: &[f64], eta: &[f64], form: &S) -> Vec<f64> {
    let k = form.free_dim();
    let mut out: Vec<f64> = x[..k].iter().zip(&eta[..k]).map(|(a, b)| a + b).collect();
    let dep = form.dependent(&out);
    out.extend(dep);
    out
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SphereRetraction;

impl Retraction for SphereRetraction {
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        sphere_retract(x, eta)
    }
    fn order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StiefelRetraction {
    pub n: usize,
    pub p: usize,
}

impl Retraction for StiefelRetraction {
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        stiefel_retract(x, eta, self.n, self.p)
    }
    fn order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

/// Orthographic retraction for a constraint in solved form.
#[derive(Clone, Debug)]
pub struct GraphRetraction<S>(pub S);

impl<S: SolvedForm> Retraction for GraphRetraction<S> {
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        Ok(orthographic_graph_retract(x, eta, &self.0))
    }
    fn order(&self) -> RetractionOrder {
        RetractionOrder::Second
    }
}

/// Retraction on `M × E_L`: `inner` on the leading `dim_x` block, identity on the rest.
#[derive(Clone, Debug)]
pub struct ProductRetraction<R> {
    pub inner: R,
    pub dim_x: usize,
}

/// Lifts `r` to the product with the multiplier space.
pub fn product_retract<R: Retraction>(r: R, dim_x: usize) -> ProductRetraction<R> {
    ProductRetraction { inner: r, dim_x }
}

impl<R: Retraction> Retraction for ProductRetraction<R> {
    fn retract(&self, x: &[f64], eta: &[f64]) -> Result<Vec<f64>, RetractionError> {
        let (xa, xl) = x.split_at(self.dim_x);
        let (ea, el) = eta.split_at(self.dim_x);
        let mut out = self.inner.retract(xa, ea)?;
        out.extend(add(xl, el));
        Ok(out)
    }
    fn order(&self) -> RetractionOrder {
        self.inner.order()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, sub};
    use crate::rng::{normal_vec, seeded, unit_vector};
    use proptest::prelude::*;
    use std::vec;
    use std::vec::Vec;

    fn tangent_at(x: &[f64], v: &[f64]) -> Vec<f64> {
        let c = dot(x, v);
        v.iter().zip(x).map(|(a, b)| a - c * b).collect()
    }

    #[test]
    fn sphere_zero_step_and_quarter_turn() {
        let x = [0.6, 0.8];
        assert_eq!(sphere_retract(&x, &[0.0, 0.0]).unwrap(), x.to_vec());
        let r = sphere_retract(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((r[0] - s).abs() < 1e-15 && (r[1] - s).abs() < 1e-15);
    }

    #[test]
    fn sphere_degenerate_step() {
        assert!(matches!(sphere_retract(&[1.0, 0.0], &[-1.0, 0.0]), Err(RetractionError::DegenerateStep { .. })));
    }

    #[test]
    fn sphere_taylor_remainder_is_quadratic() {
        let mut rng = seeded(12);
        let x = unit_vector(&mut rng, 5);
        let eta = tangent_at(&x, &normal_vec(&mut rng, 5));
        let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&t| {
                let te = scaled(t, &eta);
                let r = sphere_retract(&x, &te).unwrap();
                norm(&sub(&sub(&r, &x), &te)) / (t * t)
            })
            .collect();
        let bound = 2.0 * dot(&eta, &eta);
        assert!(ratios.iter().all(|&q| q < bound), "{ratios:?}");
    }

    #[test]
    fn stiefel_reduces_to_sphere_for_one_column() {
        let mut rng = seeded(3);
        let x = unit_vector(&mut rng, 4);
        let eta = tangent_at(&x, &normal_vec(&mut rng, 4));
        let a = stiefel_retract(&x, &eta, 4, 1).unwrap();
        let b = sphere_retract(&x, &eta).unwrap();
        assert!(norm(&sub(&a, &b)) < 1e-14);
        assert_eq!(stiefel_retract(&x, &[0.0; 4], 4, 1).unwrap().len(), 4);
    }

    fn stiefel_point(seed: u64, n: usize, p: usize) -> (Mat, Mat) {
        let mut rng = seeded(seed);
        let x = crate::linalg::column_space(&crate::rng::normal_mat(&mut rng, n, p));
        let v = crate::rng::normal_mat(&mut rng, n, p);
        // tangent: v - x sym(xᵀv)
        let s = x.transpose().matmul(&v);
        let sym = s.add(&s.transpose()).scale(0.5);
        (x.clone(), v.sub(&x.matmul(&sym)))
    }

    #[test]
    fn stiefel_output_is_orthonormal_and_first_order() {
        let (x, eta) = stiefel_point(5, 6, 2);
        for &t in &[1e-2, 1e-3, 1e-4] {
            let te = eta.scale(t);
            let r = Mat::from_row_major(6, 2, stiefel_retract(x.as_slice(), te.as_slice(), 6, 2).unwrap()).unwrap();
            assert!(r.transpose().matmul(&r).sub(&Mat::identity(2)).norm_fro() < 1e-12);
            let rem = r.sub(&x).sub(&te).norm_fro() / (t * t);
            assert!(rem < 2.0 * eta.norm_fro().powi(2));
        }
    }

    struct SinCos {
        free: usize,
    }

    impl SolvedForm for SinCos {
        fn free_dim(&self) -> usize {
            self.free
        }
        fn dependent(&self, f: &[f64]) -> Vec<f64> {
            vec![f.iter().map(|y| y + y.sin()).sum(), f.iter().map(|y| y + y.cos()).sum()]
        }
    }

    #[test]
    fn graph_retraction_is_feasible() {
        let form = SinCos { free: 1 };
        let x = orthographic_graph_retract(&[0.3, 0.0, 0.0], &[0.0; 3], &form);
        assert_eq!(orthographic_graph_retract(&x, &[0.0; 3], &form), x);
        let mut rng = seeded(4);
        for _ in 0..20 {
            let eta = scaled(0.1, &normal_vec(&mut rng, 3));
            let y = orthographic_graph_retract(&x, &eta, &form);
            assert!((y[1] - (y[0] + y[0].sin())).abs() <= 1e-14);
            assert!((y[2] - (y[0] + y[0].cos())).abs() <= 1e-14);
        }
    }

    #[test]
    fn product_retraction_blocks() {
        let r = product_retract(SphereRetraction, 2);
        let out = r.retract(&[1.0, 0.0, 3.0], &[0.0, 1.0, 0.25]).unwrap();
        assert_eq!(out[2], 3.25);
        let inner = sphere_retract(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(&out[..2], inner.as_slice());
        assert_eq!(r.order(), RetractionOrder::Second);
    }

    proptest! {
        #[test]
        fn sphere_first_order(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = seeded(seed);
            let x = unit_vector(&mut rng, n);
            let eta = tangent_at(&x, &normal_vec(&mut rng, n));
            let t = 1e-4;
            let r = sphere_retract(&x, &scaled(t, &eta)).unwrap();
            let d = scaled(1.0 / t, &sub(&r, &x));
            prop_assert!(norm(&sub(&d, &eta)) <= 1e-3 * norm(&eta).max(1e-300));
        }

        #[test]
        fn sphere_second_order_is_normal(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = seeded(seed);
            let x = unit_vector(&mut rng, n);
            let eta = tangent_at(&x, &normal_vec(&mut rng, n));
            let t = 1e-4;
            let r = sphere_retract(&x, &scaled(t, &eta)).unwrap();
            let acc = scaled(1.0 / (t * t), &sub(&sub(&r, &x), &scaled(t, &eta)));
            let tangential = tangent_at(&x, &acc);
            prop_assert!(norm(&tangential) <= 1e-3 * (1.0 + norm(&eta).powi(3)));
        }

        #[test]
        fn stiefel_second_order_is_normal(seed in any::<u64>()) {
            let (x, eta) = stiefel_point(seed, 5, 2);
            let t = 1e-4;
            let te = eta.scale(t);
            let r = Mat::from_row_major(5, 2, stiefel_retract(x.as_slice(), te.as_slice(), 5, 2).unwrap()).unwrap();
            let acc = r.sub(&x).sub(&te).scale(1.0 / (t * t));
            // normal space at x is {x S : S symmetric}
            let s = x.transpose().matmul(&acc);
            let sym = s.add(&s.transpose()).scale(0.5);
            let tangential = acc.sub(&x.matmul(&sym));
            prop_assert!(tangential.norm_fro() <= 1e-3 * (1.0 + eta.norm_fro().powi(3)));
        }
    }
}
