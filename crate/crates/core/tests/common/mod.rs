//! Instance registry shared by the integration tests and the acceptance gate.
#![allow(dead_code)]

use num_complex::Complex64;
use rqi_core::instances::graph::{build_graph, FKind, HKind};
use rqi_core::instances::matrix::{build_matrix_eigen, LeftInverseChoice, Normalization};
use rqi_core::instances::nlep::{build_nlep, NlepNormalization, PolynomialMatrix, TwoSidedNlep};
use rqi_core::instances::stiefel::{build_stiefel, random_stiefel_point, StiefelEigen};
use rqi_core::instances::tensor::{build_tensor_complex, build_tensor_real};
use rqi_core::instances::two_sided::{build_two_sided, two_sided_start, TwoSidedNorms};
use rqi_core::linalg::{normalized, realify_vector, Mat};
use rqi_core::model::{Constraint, ExplicitLagrangian, GeneralLagrangian};
use rqi_core::multilinear::SymmetricTensor;
use rqi_core::rng::{complex_normal_mat, nonnormal_matrix, normal_vec, seeded, symmetric_matrix, unit_complex_vector};

/// A registered instance with a feasible base point.
pub struct Case {
    pub name: String,
    pub problem: Box<dyn GeneralLagrangian>,
    pub explicit: Option<Box<dyn ExplicitLagrangian>>,
    pub constraint: Box<dyn Constraint>,
    pub base: Vec<f64>,
}

impl Case {
    /// Feasible point near the base point, obtained by retraction.
    pub fn random_point(&self, seed: u64, scale: f64) -> Vec<f64> {
        let d: Vec<f64> = normal_vec(&mut seeded(seed), self.base.len()).iter().map(|v| v * scale).collect();
        self.constraint.retract(&self.base, &d).expect("retraction")
    }

    pub fn random_direction(&self, seed: u64) -> Vec<f64> {
        normal_vec(&mut seeded(seed ^ 0x5eed), self.base.len())
    }

    pub fn random_lambda(&self, seed: u64) -> Vec<f64> {
        normal_vec(&mut seeded(seed ^ 0x1a3b), self.problem.dim_lambda()).iter().map(|v| 0.5 * v).collect()
    }
}

fn case<G, C>(name: &str, problem: G, explicit: Option<Box<dyn ExplicitLagrangian>>, constraint: C, base: Vec<f64>) -> Case
where
    G: GeneralLagrangian + 'static,
    C: Constraint + 'static,
{
    Case { name: name.into(), problem: Box::new(problem), explicit, constraint: Box::new(constraint), base }
}

/// One case per instance family and variant.
pub fn all_cases(seed: u64) -> Vec<Case> {
    let mut out = Vec::new();
    let mut rng = seeded(seed);
    let n = 6;

    let a = symmetric_matrix(&mut rng, n);
    let u = normalized(&normal_vec(&mut rng, n)).unwrap();
    let x = normalized(&normal_vec(&mut rng, n)).unwrap();
    for (label, norm_kind, li) in [
        ("matrix sphere gram", Normalization::Sphere, LeftInverseChoice::Gram),
        ("matrix sphere fixed", Normalization::Sphere, LeftInverseChoice::Fixed(u.clone())),
        ("matrix linear gram", Normalization::Linear(u.clone()), LeftInverseChoice::Gram),
        ("matrix linear fixed", Normalization::Linear(u.clone()), LeftInverseChoice::Fixed(u.clone())),
    ] {
        let a = if label.ends_with("fixed") { nonnormal_matrix(&mut seeded(seed + 1), n) } else { a.clone() };
        let (p, c) = build_matrix_eigen(a, norm_kind, li).unwrap();
        let base = c.normalize(&x).unwrap();
        let lag = p.lagrangian.clone();
        out.push(case(label, p, Some(Box::new(lag)), c, base));
    }

    for m in [3, 4] {
        let t = SymmetricTensor::random(m, 5, seed + m as u64).unwrap();
        let (p, c) = build_tensor_real(t.clone()).unwrap();
        let lag = p.lagrangian.clone();
        let base = normalized(&normal_vec(&mut rng, 5)).unwrap();
        out.push(case(&format!("tensor real m={m}"), p, Some(Box::new(lag)), c, base));
        let (p, c) = build_tensor_complex(t).unwrap();
        let lag = p.lagrangian.clone();
        let base = realify_vector(&unit_complex_vector(&mut rng, 5));
        out.push(case(&format!("tensor complex m={m}"), p, Some(Box::new(lag)), c, base));
    }

    let ac = complex_normal_mat(&mut rng, 5, 5);
    let (p, c) = build_two_sided(ac).unwrap();
    let lag = p.lagrangian.clone();
    let base = two_sided_start(&unit_complex_vector(&mut rng, 5), &unit_complex_vector(&mut rng, 5)).unwrap();
    out.push(case("two-sided matrix", p, Some(Box::new(lag)), c, base));

    let poly = PolynomialMatrix::random(4, 3, seed + 7).unwrap();
    let z0: Vec<Complex64> = unit_complex_vector(&mut rng, 4);
    for (label, kind) in [("nlep sphere", NlepNormalization::Sphere), ("nlep linear", NlepNormalization::Linear)] {
        let (g, c, x0) = build_nlep(poly.clone(), kind, &z0).unwrap();
        out.push(case(label, g, None, c, x0));
    }
    let base = two_sided_start(&z0, &unit_complex_vector(&mut rng, 4)).unwrap();
    out.push(case("nlep two-sided", TwoSidedNlep::new(poly), None, TwoSidedNorms { n: 4 }, base));

    let st = StiefelEigen::random(5, 2, 0.5, seed + 11).unwrap();
    let (p, c) = build_stiefel(st.clone());
    out.push(case("stiefel", p, Some(Box::new(st)), c, random_stiefel_point(5, 2, seed + 12)));

    for (k, (f, h)) in [(FKind::Linear, HKind::Constant), (FKind::Linear, HKind::Quadratic), (FKind::Sine, HKind::Constant), (FKind::Sine, HKind::Quadratic)]
        .into_iter()
        .enumerate()
    {
        let g = build_graph(4, f, h, seed + 20 + k as u64).unwrap();
        let base = g.perturbed_start(0.3, seed + 30);
        let lag = g.problem.lagrangian.clone();
        out.push(case(&format!("graph {f:?}/{h:?}"), g.problem, Some(Box::new(lag)), g.constraint, base));
    }
    out
}

/// `M H`, `Π²` and `Π H` deviations at `x`.
pub fn projection_defects(case: &Case, x: &[f64], lambda: &[f64]) -> Option<(f64, f64, f64)> {
    let h = case.problem.llambda(x, lambda).scale(-1.0);
    let m = case.problem.left_inverse(x, lambda).ok()?;
    let k = h.cols();
    let pi = Mat::identity(h.rows()).sub(&h.matmul(&m));
    let scale = h.norm_fro().max(1.0);
    let mh = m.matmul(&h).sub(&Mat::identity(k)).norm_fro();
    let idem = pi.matmul(&pi).sub(&pi).norm_fro() / pi.norm_fro().max(1.0);
    let annihilate = pi.matmul(&h).norm_fro() / scale;
    Some((mh, idem, annihilate))
}
