//! Seeded random instances: convex piecewise ϑ at a point where several
//! pieces meet, composed with affine or low-degree polynomial maps.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::composite::{Assumptions, Composite, SmoothMap};
use crate::error::Result;
use crate::kkt::KktPoint;
use crate::numeric::linalg::{self, Matrix, SymMatrix, Vector};
use crate::numeric::scalar::{int, rat};
use crate::numeric::{ExtScalar, Polynomial, Scalar};
use crate::optimality::CompositeProblem;
use crate::polyhedra::{Constraint, Polyhedron};
use crate::pwlq::{Piece, PwlqFunction};

pub type SuiteRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A composite with a base point, its image and a subgradient there.
#[derive(Clone, Debug)]
pub struct Instance {
    pub composite: Composite,
    pub x: Vector,
    pub v: Vector,
    pub lambda: Vector,
}

#[derive(Clone, Debug)]
pub struct KktInstance {
    pub problem: CompositeProblem,
    pub point: KktPoint,
}

fn small_vec(rng: &mut SuiteRng, len: usize, bound: i64) -> Vector {
    (0..len).map(|_| int(rng.gen_range(-bound..=bound))).collect()
}

fn small_matrix(rng: &mut SuiteRng, rows: usize, cols: usize, bound: i64) -> Matrix {
    let rs: Vec<Vector> = (0..rows).map(|_| small_vec(rng, cols, bound)).collect();
    Matrix::from_rows(cols, &rs).expect("row lengths match")
}

/// BᵀB for a random B with up to `m` rows, or zero.
fn psd_matrix(rng: &mut SuiteRng, m: usize) -> SymMatrix {
    let r = rng.gen_range(0..=m);
    if r == 0 {
        return SymMatrix::zeros(m);
    }
    let b = small_matrix(rng, r, m, 1);
    SymMatrix::from_full(&b.transpose().mul(&b).expect("shapes match")).expect("square")
}

fn symmetric_matrix(rng: &mut SuiteRng, n: usize) -> SymMatrix {
    let mut s = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            s.set(i, j, int(rng.gen_range(-2..=2)));
        }
    }
    s
}

/// ½yᵀAy + max_i aᵢᵀy on a polyhedral cone D. All pieces meet at 0.
pub fn max_affine_theta(rng: &mut SuiteRng, m: usize, max_pieces: usize, full_domain: bool) -> PwlqFunction {
    let quad = psd_matrix(rng, m);
    let count = rng.gen_range(1..=max_pieces);
    let mut slopes: Vec<Vector> = Vec::new();
    for _ in 0..count {
        let a = small_vec(rng, m, 2);
        if !slopes.contains(&a) {
            slopes.push(a);
        }
    }
    let domain: Vec<Vector> =
        if full_domain { Vec::new() } else { (0..rng.gen_range(1..=2)).map(|_| small_vec(rng, m, 1)).collect() };
    let mut pieces = Vec::new();
    for (i, a) in slopes.iter().enumerate() {
        let mut ineq: Vec<Constraint> = domain.iter().map(|g| Constraint::new(g.clone(), Scalar::zero())).collect();
        for (j, b) in slopes.iter().enumerate() {
            if i != j {
                ineq.push(Constraint::new(linalg::sub(b, a), Scalar::zero()));
            }
        }
        let omega = Polyhedron::new(m, ineq, Vec::new()).expect("dimensions match");
        if !omega.is_empty() {
            pieces.push(Piece::new(omega, quad.clone(), a.clone(), Scalar::zero()));
        }
    }
    PwlqFunction::new(m, pieces).expect("max of affine pieces is consistent")
}

/// One-dimensional separable conjugate together with a base point at a
/// breakpoint or at the origin.
fn separable_theta(rng: &mut SuiteRng) -> (PwlqFunction, Scalar) {
    let b = int(rng.gen_range(0..=2));
    let lo = if rng.gen_bool(0.8) { ExtScalar::Finite(int(-rng.gen_range(1..=2))) } else { ExtScalar::NegInf };
    let hi = if rng.gen_bool(0.8) { ExtScalar::Finite(int(rng.gen_range(1..=2))) } else { ExtScalar::PosInf };
    let mut bases = vec![Scalar::zero()];
    if !b.is_zero() {
        bases.extend(lo.finite().map(|l| &b * l));
        bases.extend(hi.finite().map(|u| &b * u));
    }
    let base = bases.choose(rng).expect("nonempty").clone();
    let theta = PwlqFunction::enlp_separable(&[b], &[(lo, hi)]).expect("valid interval");
    (theta, base)
}

/// A random element of ∂ϑ(y): a vertex, possibly averaged with another and
/// shifted along a recession direction.
pub fn random_subgradient(rng: &mut SuiteRng, theta: &PwlqFunction, y: &[Scalar]) -> Result<Vector> {
    let sd = theta.subdifferential(y)?;
    let g = sd.generators();
    let mut lambda = g.vertices.choose(rng).expect("subdifferential is nonempty").clone();
    if g.vertices.len() > 1 && rng.gen_bool(0.5) {
        let other = g.vertices.choose(rng).expect("nonempty");
        lambda = linalg::scale(&rat(1, 2), &linalg::add(&lambda, other));
    }
    let mut directions = g.rays.clone();
    directions.extend(g.lineality.iter().cloned());
    if !directions.is_empty() && rng.gen_bool(0.5) {
        let r = directions.choose(rng).expect("nonempty");
        lambda = linalg::add(&lambda, r);
    }
    Ok(lambda)
}

fn random_theta(rng: &mut SuiteRng, m: usize, full_domain: bool) -> (PwlqFunction, Vector) {
    if m == 1 && rng.gen_bool(0.4) {
        let (theta, base) = separable_theta(rng);
        (theta, vec![base])
    } else {
        (max_affine_theta(rng, m, 3, full_domain), linalg::zeros(m))
    }
}

fn finish(rng: &mut SuiteRng, theta: PwlqFunction, f: SmoothMap, x: Vector) -> Result<Instance> {
    let y = f.eval(&x)?;
    let lambda = random_subgradient(rng, &theta, &y)?;
    let v = f.jacobian(&x)?.tmul_vec(&lambda)?;
    let composite = Composite::new(theta, f, Assumptions::default())?;
    Ok(Instance { composite, x, v, lambda })
}

/// ϑ(M(x - x̄) + ȳ) with small integer data.
pub fn affine_instance(rng: &mut SuiteRng, n: usize, m: usize) -> Result<Instance> {
    let x = small_vec(rng, n, 2);
    affine_instance_at(rng, x, m)
}

pub fn affine_instance_at(rng: &mut SuiteRng, x: Vector, m: usize) -> Result<Instance> {
    let full = rng.gen_bool(0.3);
    let (theta, base) = random_theta(rng, m, full);
    let jac = small_matrix(rng, m, x.len(), 2);
    let offset = linalg::sub(&base, &jac.mul_vec(&x)?);
    let f = SmoothMap::affine(&jac, &offset)?;
    finish(rng, theta, f, x)
}

/// ϑ(x) itself, at its base point.
pub fn identity_instance(rng: &mut SuiteRng, m: usize) -> Result<Instance> {
    let full = rng.gen_bool(0.3);
    let (theta, base) = random_theta(rng, m, full);
    finish(rng, theta, SmoothMap::identity(m), base)
}

/// Components ȳ_k + M_k x + a few quadratic and cubic monomials with small
/// coefficients, at x̄ = 0. M has full row rank when m <= n and the domain
/// is all of ℝ^m otherwise, so the map is metrically regular there. The
/// domain of ϑ is full-dimensional.
pub fn polynomial_instance(rng: &mut SuiteRng, n: usize, m: usize) -> Result<Instance> {
    let mut jac = small_matrix(rng, m, n, 1);
    let full = m > n || rng.gen_bool(0.5);
    if m <= n {
        while jac.rank() < m {
            jac = small_matrix(rng, m, n, 1);
        }
    }
    let (mut theta, mut base) = random_theta(rng, m, full);
    // exact arcs cannot be restored onto a curved lower-dimensional domain
    while !theta.pieces().iter().any(|p| p.omega.affine_dim() == Some(m)) {
        (theta, base) = random_theta(rng, m, full);
    }
    let coefficients = [rat(-1, 8), rat(-1, 16), rat(1, 16), rat(1, 8)];
    let mut components = Vec::new();
    for k in 0..m {
        let mut p = Polynomial::affine(jac.row(k), base[k].clone());
        for _ in 0..rng.gen_range(1..=3) {
            let degree = rng.gen_range(2..=3);
            let mut mono = Polynomial::constant(n, coefficients.choose(rng).expect("nonempty").clone());
            for _ in 0..degree {
                mono = mono.mul(&Polynomial::var(n, rng.gen_range(0..n)));
            }
            p = p.add(&mono);
        }
        components.push(p);
    }
    let f = SmoothMap::new(n, components)?;
    finish(rng, theta, f, linalg::zeros(n))
}

/// An affine instance at x̄ = 0 with φ₀ = ½xᵀPx - (Mᵀλ̄)ᵀx, so (0, λ̄) is a
/// KKT pair.
pub fn kkt_instance(rng: &mut SuiteRng, n: usize, m: usize) -> Result<KktInstance> {
    let full = rng.gen_bool(0.3);
    let (theta, base) = random_theta(rng, m, full);
    let jac = small_matrix(rng, m, n, 2);
    let f = SmoothMap::affine(&jac, &base)?;
    let lambda = random_subgradient(rng, &theta, &base)?;
    let hess = if rng.gen_bool(0.5) { psd_matrix(rng, n) } else { symmetric_matrix(rng, n) };
    let linear = linalg::neg(&jac.tmul_vec(&lambda)?);
    let objective = Polynomial::half_quadratic(&hess).add(&Polynomial::affine(&linear, Scalar::zero()));
    let composite = Composite::new(theta, f, Assumptions::default())?;
    let problem = CompositeProblem::new(objective, composite)?;
    Ok(KktInstance { problem, point: KktPoint { x: linalg::zeros(n), lambda } })
}

/// Rays and both signs of lineality directions of a cone.
pub fn cone_directions(cone: &Polyhedron) -> Vec<Vector> {
    let g = cone.generators();
    let mut out = g.rays.clone();
    for l in &g.lineality {
        out.push(l.clone());
        out.push(linalg::neg(l));
    }
    out
}

/// `cone_directions` scaled to unit sup-norm.
pub fn unit_directions(cone: &Polyhedron) -> Vec<Vector> {
    cone_directions(cone)
        .into_iter()
        .map(|d| {
            let s = linalg::norm_inf(&d);
            linalg::scale(&(Scalar::from_integer(1.into()) / s), &d)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible() {
        let a = affine_instance(&mut rng(7), 3, 2).unwrap();
        let b = affine_instance(&mut rng(7), 3, 2).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.v, b.v);
    }

    #[test]
    fn subgradient_lies_in_subdifferential() {
        let mut r = rng(3);
        for _ in 0..20 {
            let inst = affine_instance(&mut r, 2, 2).unwrap();
            let y = inst.composite.f.eval(&inst.x).unwrap();
            assert!(inst.composite.theta.subdifferential(&y).unwrap().contains(&inst.lambda).unwrap());
        }
    }

    #[test]
    fn kkt_instances_validate() {
        let mut r = rng(11);
        for _ in 0..10 {
            let k = kkt_instance(&mut r, 2, 2).unwrap();
            crate::kkt::KktSite::new(&k.problem, k.point.clone(), Default::default()).unwrap();
        }
    }
}
