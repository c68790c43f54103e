//! Multiplier uniqueness, strong Robinson qualification and strong metric
//! subregularity of the KKT system ∇φ₀(x) + ∇f(x)ᵀλ = 0, λ ∈ ∂ϑ(f(x)).

use serde_json::json;

use crate::copositivity::{self, MaxQuadOnCone, Mode};
use crate::error::{check_dim, Error, Result};
use crate::numeric::linalg::{self, Vector};
use crate::numeric::rat;
use crate::optimality::{CompositeProblem, ProblemSite};
use crate::polyhedra::json::{text_vector, to_json};
use crate::polyhedra::{Constraint, PolyUnion, Polyhedron};
use crate::verdict::{Method, Outcome, Verdict, Witness};

#[derive(Clone, Debug, PartialEq)]
pub struct KktPoint {
    pub x: Vector,
    pub lambda: Vector,
}

/// A validated KKT pair together with its site data.
#[derive(Debug)]
pub struct KktSite<'a> {
    pub point: KktPoint,
    pub at: ProblemSite<'a>,
}

impl<'a> KktSite<'a> {
    pub fn new(problem: &'a CompositeProblem, point: KktPoint, opts: copositivity::Options) -> Result<Self> {
        check_dim(problem.composite.m(), point.lambda.len())?;
        let at = ProblemSite::new(problem, &point.x, opts)?;
        if !at.site.theta_subdifferential()?.contains(&point.lambda)? {
            return Err(Error::InvalidKkt("multiplier is not in the subdifferential of ϑ at f(x)".into()));
        }
        let residual = linalg::add(&at.grad, &at.site.jac.tmul_vec(&point.lambda)?);
        if !linalg::is_zero(&residual) {
            return Err(Error::InvalidKkt(format!("gradient of the Lagrangian is [{}]", text_vector(&residual).join(", "))));
        }
        Ok(KktSite { point, at })
    }

    fn theta_critical_pieces(&self) -> Result<(Vec<(usize, Polyhedron)>, Polyhedron)> {
        let cc = self.at.site.composite.theta.critical_cone(&self.at.site.y, &self.point.lambda)?;
        Ok((cc.pieces, cc.hull))
    }

    /// K_ϑ(f(x̄), λ̄)* ∩ ker ∇f(x̄)ᵀ, with the polar computed piecewise and
    /// checked against the polar of the hull.
    pub fn robinson_cone(&self) -> Result<Polyhedron> {
        let (pieces, hull) = self.theta_critical_pieces()?;
        let m = self.at.site.m();
        let mut polar = Polyhedron::full(m);
        for (_, k) in &pieces {
            polar = polar.intersect(&k.polar_cone())?;
        }
        if !polar.set_eq(&hull.polar_cone()) {
            return Err(Error::Invariant("polar of the critical cone differs from the intersection of piece polars".into()));
        }
        polar.intersect(&self.at.site.kernel_of_transpose())
    }

    pub fn strong_robinson(&self) -> Result<Verdict> {
        let c = self.robinson_cone()?;
        let cert = json!({ "cone": to_json(&c) });
        let verdict = match c.nonzero_element() {
            None => Verdict::holds(Method::StrongRobinson).with_certificate(cert),
            Some(u) => Verdict::fails(Method::StrongRobinson, Witness::Vector(u)).with_certificate(cert),
        };
        if verdict.is_holds() && !self.at.site.check_metric_regularity()?.is_holds() {
            return Err(Error::Invariant("strong Robinson holds but metric regularity fails".into()));
        }
        Ok(verdict)
    }

    pub fn multipliers(&self) -> Result<Polyhedron> {
        self.at.site.multiplier_set(&self.at.target())
    }

    pub fn uniqueness_check(&self) -> Result<Verdict> {
        let sr = self.strong_robinson()?;
        let lam = self.multipliers()?;
        let singleton = lam.is_singleton();
        if singleton != sr.is_holds() {
            return Err(Error::Invariant("strong Robinson verdict disagrees with the size of the multiplier set".into()));
        }
        let mut v = sr;
        v.method = Method::Exact;
        v.certificate = Some(json!({ "multipliers": to_json(&lam) }));
        Ok(v)
    }

    /// d²ϑ(f(x̄), λ̄)(∇f(x̄)w) + ⟨∇²L(x̄, λ̄)w, w⟩ > 0 on critical w ≠ 0.
    pub fn single_multiplier_soc(&self) -> Result<Verdict> {
        self.at.site.require_license()?;
        let (pieces, _) = self.theta_critical_pieces()?;
        let site = &self.at.site;
        let zero = linalg::zeros(site.m());
        let lagrangian = self.at.lagrangian_hessian(&self.point.lambda);
        let mut problems = Vec::new();
        for (i, k) in &pieces {
            let cone = k.preimage(&site.jac, &zero)?;
            let form = site.composite.theta.pieces()[*i].quad.congruence(&site.jac).add(&lagrangian);
            problems.push(MaxQuadOnCone { forms: vec![form], cone: PolyUnion::new(site.n(), vec![cone]) });
        }
        let results: Vec<_> =
            problems.iter().map(|q| copositivity::check_sign_on_cone(q, Mode::Strict, &site.opts).verdict).collect();
        let mut outcome = Outcome::Holds;
        let mut witness = None;
        for r in &results {
            match r.outcome {
                Outcome::Fails => {
                    outcome = Outcome::Fails;
                    witness = witness.or_else(|| r.witness.clone());
                }
                Outcome::Unknown if outcome == Outcome::Holds => outcome = Outcome::Unknown,
                _ => {}
            }
        }
        let mut v = Verdict::new(outcome, Method::SecondOrder).with_sub(results);
        v.witness = witness;
        Ok(v)
    }

    pub fn kkt_ssr(&self) -> Result<Verdict> {
        let sr = self.strong_robinson()?;
        let soc = self.single_multiplier_soc()?;
        let outcome = match (sr.outcome, soc.outcome) {
            (Outcome::Fails, _) | (_, Outcome::Fails) => Outcome::Fails,
            (Outcome::Holds, Outcome::Holds) => Outcome::Holds,
            _ => Outcome::Unknown,
        };
        if outcome == Outcome::Holds && !self.uniqueness_check()?.is_holds() {
            return Err(Error::Invariant("KKT subregularity holds with non-unique multipliers".into()));
        }
        let mut v = Verdict::new(outcome, Method::Exact);
        v.witness = if sr.is_fails() { sr.witness.clone() } else { soc.witness.clone() };
        Ok(v.with_sub(vec![sr, soc]))
    }

    /// Directions probed by `isos1_probe`: zero, the critical cone
    /// generators and their pairwise sums and halves.
    pub fn probe_directions(&self) -> Result<Vec<Vector>> {
        let (_, hull) = self.theta_critical_pieces()?;
        let site = &self.at.site;
        let critical = hull.preimage(&site.jac, &linalg::zeros(site.m()))?;
        let g = critical.generators();
        let mut base: Vec<Vector> = g.rays.clone();
        for l in &g.lineality {
            base.push(l.clone());
            base.push(linalg::neg(l));
        }
        let mut out = vec![linalg::zeros(site.n())];
        out.extend(base.iter().cloned());
        let half = rat(1, 2);
        for (a, r) in base.iter().enumerate() {
            for s in &base[a + 1..] {
                out.push(linalg::add(r, s));
                out.push(linalg::axpy(r, &half, s));
            }
        }
        out.retain(|w| critical.contains(w).unwrap_or(false));
        let mut seen = Vec::new();
        for w in out {
            if !seen.contains(&w) {
                seen.push(w);
            }
        }
        Ok(seen)
    }

    /// Searches for (w, u) ≠ 0 with ∇²L w + ∇f(x̄)ᵀu = 0 and
    /// u ∈ (D∂ϑ)(f(x̄), λ̄)(∇f(x̄)w). Absence of a witness is reported as
    /// Unknown.
    pub fn isos1_probe(&self, directions: &[Vector]) -> Result<Verdict> {
        let site = &self.at.site;
        let lagrangian = self.at.lagrangian_hessian(&self.point.lambda);
        let theta = &site.composite.theta;
        for w in directions {
            check_dim(site.n(), w.len())?;
            let d = site.jac.mul_vec(w)?;
            let proto = theta.proto_derivative(&site.y, &self.point.lambda, &d)?;
            if proto.is_empty() {
                continue;
            }
            let rhs = linalg::neg(&lagrangian.apply(w));
            let mut eqs = proto.eqs().to_vec();
            for k in 0..site.n() {
                eqs.push(Constraint::new(site.jac.col(k), rhs[k].clone()));
            }
            let solutions = Polyhedron::new(site.m(), proto.ineqs().to_vec(), eqs)?;
            let u = if linalg::is_zero(w) {
                solutions.nonzero_element()
            } else {
                crate::linprog::feasible_point(&solutions)
            };
            if let Some(u) = u {
                return Ok(Verdict::fails(Method::Probe, Witness::Pair { w: w.clone(), u }));
            }
        }
        Ok(Verdict::unknown(Method::Probe, "consistent").with_certificate(json!({ "directions": directions.len() })))
    }
}
