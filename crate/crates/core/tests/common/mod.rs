#![allow(dead_code)]

use vamkit::composite::{Assumptions, Composite, SmoothMap};
use vamkit::numeric::linalg::from_ints;
use vamkit::numeric::{int, ExtScalar, Polynomial, Scalar};
use vamkit::optimality::CompositeProblem;
use vamkit::polyhedra::Polyhedron;
use vamkit::pwlq::PwlqFunction;

pub fn v(xs: &[i64]) -> Vec<Scalar> {
    from_ints(xs)
}

/// ½y1² + δ_{y2 = 0} composed with (x1 - x2, 0).
pub fn fmr_a() -> Composite {
    let inf = (ExtScalar::NegInf, ExtScalar::PosInf);
    let theta = PwlqFunction::enlp_separable(&[int(1), int(0)], &[inf.clone(), inf]).unwrap();
    let f = SmoothMap::parse(2, &["x1 - x2", "0"]).unwrap();
    Composite::new(theta, f, Assumptions::default()).unwrap()
}

/// Indicator of the nonpositive orthant in R^3 composed with three quadratics.
pub fn fmr_b() -> Composite {
    let theta = PwlqFunction::indicator(Polyhedron::orthant(3, false)).unwrap();
    let f = SmoothMap::parse(
        3,
        &["x1 - 1/2*x2^2", "x1 - 1/2*x3^2", "-x1 - 1/2*x1^2 - 1/2*x2^2 - 1/2*x3^2"],
    )
    .unwrap();
    Composite::new(theta, f, Assumptions::default()).unwrap()
}

pub fn problem(phi0: &str, c: Composite) -> CompositeProblem {
    let n = c.n();
    CompositeProblem::new(Polynomial::parse(phi0, n).unwrap(), c).unwrap()
}

/// Identity map into the indicator of (-∞, 0] or [0, ∞).
pub fn half_line(nonneg: bool) -> Composite {
    let theta = PwlqFunction::indicator(Polyhedron::orthant(1, nonneg)).unwrap();
    Composite::new(theta, SmoothMap::identity(1), Assumptions::default()).unwrap()
}

/// ϑ ≡ 0 on the line composed with the identity.
pub fn zero_theta() -> Composite {
    let theta = PwlqFunction::indicator(Polyhedron::full(1)).unwrap();
    Composite::new(theta, SmoothMap::identity(1), Assumptions::default()).unwrap()
}
