//! Cross-checks of the closed forms: quotient oracles, primal-dual
//! equality, the proto-derivative relation and the sum rules.

use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::composite::{sum_compose, Composite, MultiplierAnalysis, Site};
use crate::copositivity;
use crate::error::{check_dim, Error, Result};
use crate::linprog::{self, Sense};
use crate::optimality::CompositeProblem;
use crate::numeric::linalg::{self, hessian_apply, Matrix, Vector};
use crate::numeric::scalar::{fmt_scalar, pow2_inv, rat};
use crate::numeric::{ExtScalar, Scalar};
use crate::oracle::{self, QuotientProbe};
use crate::polyhedra::json::{text_vector, to_json};
use crate::polyhedra::{Constraint, Generators, Polyhedron};
use crate::pwlq::PwlqFunction;
use crate::verdict::{Method, Outcome, Verdict};

fn agreement(ok: bool, method: Method, detail: &str) -> Verdict {
    if ok {
        Verdict::holds(method)
    } else {
        Verdict::new(Outcome::Fails, method).with_detail(detail.to_string())
    }
}

/// multiplier LP value plus the ϑ term against the parabolic dual value.
pub fn primal_dual(ma: &MultiplierAnalysis, w: &[Scalar]) -> Result<Verdict> {
    if !ma.is_critical(w)? {
        return Ok(Verdict::unknown(Method::Exact, "direction is not critical"));
    }
    let primal = ma.d2(w)?;
    let dual = ma.parabolic_dual(w)?;
    let ok = primal == ExtScalar::Finite(dual.value.clone());
    Ok(agreement(ok, Method::Exact, "primal and dual values differ")
        .with_certificate(json!({ "primal": primal.to_text(), "dual": fmt_scalar(&dual.value), "piece": dual.piece })))
}

/// Moves a point into the piece's domain by the least 1-norm step of the
/// linearized constraints, keeping a margin on inequalities.
fn restore(composite: &Composite, piece: usize, xi: &[Scalar], margin: &Scalar) -> Result<Option<Vector>> {
    if composite.eval(xi)?.is_finite() {
        return Ok(Some(xi.to_vec()));
    }
    let n = xi.len();
    let y = composite.f.eval(xi)?;
    let jac = composite.f.jacobian(xi)?;
    let omega = &composite.theta.pieces()[piece].omega;
    let lift = |c: &Constraint| -> Result<(Vector, Scalar)> {
        let g = jac.tmul_vec(&c.row)?;
        let mut row = g.clone();
        row.extend(linalg::neg(&g));
        Ok((row, &c.rhs - linalg::dot(&c.row, &y)))
    };
    let mut ineq = Vec::new();
    for c in omega.ineqs() {
        let (row, rhs) = lift(c)?;
        ineq.push(Constraint::new(row, rhs - margin));
    }
    for k in 0..2 * n {
        ineq.push(Constraint::new(linalg::neg(&linalg::unit(2 * n, k)), Scalar::zero()));
    }
    let mut eq = Vec::new();
    for c in omega.eqs() {
        let (row, rhs) = lift(c)?;
        eq.push(Constraint::new(row, rhs));
    }
    let p = Polyhedron::new(2 * n, ineq, eq)?;
    let cost = vec![Scalar::one(); 2 * n];
    let r = linprog::solve(&cost, &p, Sense::Min);
    let Some(d) = r.optimizer else { return Ok(None) };
    let step = linalg::sub(&d[..n], &d[n..]);
    let point = linalg::add(xi, &step);
    Ok(composite.eval(&point)?.is_finite().then_some(point))
}

/// The arc x + t w + ½t² z through an optimal solution z of the parabolic
/// dual, restored into the domain when the curvature of f pushes it out.
pub fn theorem_arc<'m>(ma: &'m MultiplierAnalysis, w: &[Scalar]) -> Result<impl Fn(&Scalar) -> Result<Option<Vector>> + 'm> {
    let dual = ma.parabolic_dual(w)?;
    let x = ma.site.x.clone();
    let w = w.to_vec();
    let composite = ma.site.composite;
    Ok(move |t: &Scalar| {
        let half_sq = t * t * rat(1, 2);
        let xi = linalg::axpy(&linalg::axpy(&x, t, &w), &half_sq, &dual.z);
        let margin = t * t * t * t;
        restore(composite, dual.piece, &xi, &margin)
    })
}

/// Closed-form d² against difference quotients: exact along the straight
/// line for affine f, along the theorem arc otherwise.
pub fn d2_oracle(ma: &MultiplierAnalysis, w: &[Scalar], probe: &QuotientProbe) -> Result<Verdict> {
    let composite = ma.site.composite;
    let phi = |x: &[Scalar]| composite.eval(x);
    let x = &ma.site.x;
    let d2 = ma.d2(w)?;
    if !d2.is_finite() || composite.f.is_affine() {
        let est = oracle::dq_second_subderivative(phi, x, &ma.v, w, probe)?;
        let ok = if d2.is_finite() { est.samples.iter().all(|(_, q)| *q == d2) } else { est.value == d2 };
        return Ok(agreement(ok, Method::Probe, "quotients differ from the closed form")
            .with_certificate(json!({ "closed_form": d2.to_text(), "oracle": est.to_json() })));
    }
    let arc = theorem_arc(ma, w)?;
    oracle::epi_probe(phi, x, &ma.v, arc, &d2, probe)
}

/// The relation D(∂ϑ)(y | u)(d) = ∂(½ d²ϑ(y, u))(d).
pub fn pwlq_proto_relation(theta: &PwlqFunction, y: &[Scalar], u: &[Scalar], d: &[Scalar]) -> Result<Verdict> {
    let lhs = theta.proto_derivative(y, u, d)?;
    let half = theta.half_second_subderivative(y, u)?;
    let rhs = if half.eval(d)?.is_finite() { half.subdifferential(d)? } else { Polyhedron::empty(theta.dim()) };
    Ok(agreement(lhs.set_eq(&rhs), Method::Exact, "proto-derivative differs from the subgradients of ½d²")
        .with_certificate(json!({ "proto": to_json(&lhs), "half_d2_subgradients": to_json(&rhs) })))
}

/// Subgradients of ½d²φ(x, v) at w from its representation as a
/// piecewise quadratic of ∇f(x)w plus a max of quadratics over Λ.
pub fn half_d2_subgradients(ma: &MultiplierAnalysis, w: &[Scalar]) -> Result<Polyhedron> {
    let site = ma.site;
    let n = site.n();
    if !ma.is_critical(w)? {
        return Ok(Polyhedron::empty(n));
    }
    let half = site.composite.theta.half_second_subderivative(&site.y, ma.lambda())?;
    let pulled = half.compose_affine(&site.jac, &linalg::zeros(site.m()))?;
    let first = pulled.subdifferential(w)?;
    let h = hessian_apply(&site.hess, w, w);
    let cols: Vec<Vector> = site.hess.iter().map(|q| q.apply(w)).collect();
    let curvature = Matrix::from_cols(n, &cols)?;
    let g = ma.multipliers.generators();
    let best = g.vertices.iter().map(|e| linalg::dot(e, &h)).max().ok_or_else(|| Error::Invariant("multiplier set has no vertex".into()))?;
    let image = |v: &Vector| curvature.mul_vec(v);
    let gens = Generators {
        vertices: g.vertices.iter().filter(|e| linalg::dot(e, &h) == best).map(image).collect::<Result<_>>()?,
        rays: g.rays.iter().filter(|r| linalg::dot(r, &h).is_zero()).map(image).collect::<Result<_>>()?,
        lineality: g.lineality.iter().map(image).collect::<Result<_>>()?,
    };
    first.minkowski_sum(&Polyhedron::from_generators(n, &gens)?)
}

pub fn composite_proto_relation(ma: &MultiplierAnalysis, w: &[Scalar]) -> Result<Verdict> {
    let lhs = ma.proto_derivative(w)?;
    let rhs = half_d2_subgradients(ma, w)?;
    Ok(agreement(lhs.set_eq(&rhs), Method::Exact, "proto-derivative differs from the subgradients of ½d²")
        .with_certificate(json!({ "proto": to_json(&lhs), "half_d2_subgradients": to_json(&rhs) })))
}

/// ∂(φ_1 + ... + φ_s)(x) through the stacked composite against the
/// Minkowski sum of the separate subdifferentials.
pub fn sum_rule_subdifferential(parts: &[Composite], x: &[Scalar], opts: &copositivity::Options) -> Result<Verdict> {
    let (stacked, qualification) = sum_compose(parts)?;
    if !qualification.is_holds() {
        return Ok(Verdict::unknown(Method::Exact, "sum is not qualified").with_sub(vec![qualification]));
    }
    let whole = Site::new(&stacked, x, opts.clone())?.subdifferential()?;
    let mut acc: Option<Polyhedron> = None;
    for p in parts {
        let s = Site::new(p, x, opts.clone())?.subdifferential()?;
        acc = Some(match acc {
            None => s,
            Some(a) => a.minkowski_sum(&s)?,
        });
    }
    let sum = acc.expect("nonempty sum");
    Ok(agreement(whole.set_eq(&sum), Method::Exact, "stacked subdifferential differs from the Minkowski sum")
        .with_certificate(json!({ "stacked": to_json(&whole), "minkowski": to_json(&sum) })))
}

/// d² of the stacked composite at v̄ against the max of Σ d²φ_i(x, v_i)
/// over the vertices of {(v_i) : v_i ∈ ∂φ_i(x), Σ v_i = v̄}. For affine maps
/// the sum does not depend on the decomposition, so the vertices suffice.
pub fn sum_rule_d2(parts: &[Composite], x: &[Scalar], v: &[Scalar], ws: &[Vector], opts: &copositivity::Options) -> Result<Verdict> {
    let (stacked, qualification) = sum_compose(parts)?;
    if !qualification.is_holds() {
        return Ok(Verdict::unknown(Method::Exact, "sum is not qualified").with_sub(vec![qualification]));
    }
    let n = x.len();
    check_dim(n, v.len())?;
    let whole_site = Site::new(&stacked, x, opts.clone())?;
    let whole = MultiplierAnalysis::new(&whole_site, v)?;
    let sites = parts.iter().map(|p| Site::new(p, x, opts.clone())).collect::<Result<Vec<_>>>()?;
    let mut split: Option<Polyhedron> = None;
    for s in &sites {
        let sd = s.subdifferential()?;
        split = Some(match split {
            None => sd,
            Some(acc) => acc.product(&sd),
        });
    }
    let mut split = split.ok_or_else(|| Error::Input("a sum needs at least one part".into()))?;
    for k in 0..n {
        let mut row = linalg::zeros(n * parts.len());
        for i in 0..parts.len() {
            row[i * n + k] = Scalar::one();
        }
        split = split.with_eq(Constraint::new(row, v[k].clone()))?;
    }
    let decompositions: Vec<Vec<Vector>> =
        split.generators().vertices.iter().map(|z| z.chunks(n).map(|c| c.to_vec()).collect()).collect();
    if decompositions.is_empty() {
        return Err(Error::Invariant("no decomposition of the subgradient".into()));
    }
    let analyses = decompositions
        .iter()
        .map(|vs| sites.iter().zip(vs).map(|(s, vi)| MultiplierAnalysis::new(s, vi)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut ok = true;
    for w in ws {
        let lhs = whole.d2(w)?;
        let mut best = ExtScalar::NegInf;
        for parts in &analyses {
            let mut total = ExtScalar::Finite(Scalar::zero());
            for a in parts {
                total = total + a.d2(w)?;
            }
            best = best.max(total);
        }
        ok &= lhs == best;
        rows.push(json!({ "w": text_vector(w), "stacked": lhs.to_text(), "max_decomposition": best.to_text() }));
    }
    Ok(agreement(ok, Method::Exact, "stacked d² differs from the decomposition maximum")
        .with_certificate(json!({ "decompositions": decompositions.len(), "directions": rows })))
}

/// Steps 1/8, 1/16, 1/32 used for exactness checks on PWLQ instances.
pub fn exact_schedule() -> QuotientProbe {
    QuotientProbe::with_schedule((3..=5).map(pow2_inv).collect()).expect("decreasing schedule")
}

/// Samples ψ on rational spheres of radius 2^-k, k = 3..8, around x and
/// checks ψ(x + r u) >= ψ(x) + ℓ r²|u|². Only the three smallest radii are
/// required to pass; larger ones are reported.
pub fn growth_oracle(problem: &CompositeProblem, x: &[Scalar], ell: &Scalar) -> Result<Verdict> {
    let n = x.len();
    let base = problem.eval(x)?;
    let Some(base) = base.finite().cloned() else {
        return Err(Error::NotInDomain("growth oracle needs a finite value at the base point".into()));
    };
    let mut dirs = Vec::new();
    for i in 0..n {
        for si in [1, -1] {
            let ei = linalg::scale(&Scalar::from_integer(si.into()), &linalg::unit(n, i));
            dirs.push(ei.clone());
            for j in i + 1..n {
                for sj in [1, -1] {
                    dirs.push(linalg::axpy(&ei, &Scalar::from_integer(sj.into()), &linalg::unit(n, j)));
                }
            }
        }
    }
    let mut rows = Vec::new();
    let mut holds = true;
    for k in 3..=8u32 {
        let r = pow2_inv(k);
        let mut worst: Option<Scalar> = None;
        for u in &dirs {
            let value = problem.eval(&linalg::axpy(x, &r, u))?;
            let Some(value) = value.finite() else { continue };
            let slack = value - &base - ell * &r * &r * linalg::norm2_sq(u);
            if worst.as_ref().map_or(true, |s| slack < *s) {
                worst = Some(slack);
            }
        }
        let ok = worst.as_ref().map_or(true, |s| !s.is_negative());
        if k >= 6 {
            holds &= ok;
        }
        rows.push(json!({ "radius": fmt_scalar(&r), "min_slack": worst.as_ref().map(fmt_scalar), "ok": ok }));
    }
    let cert = json!({ "ell": fmt_scalar(ell), "radii": rows });
    Ok(agreement(holds, Method::Probe, "growth fails at a small radius").with_certificate(cert))
}
