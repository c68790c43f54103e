use std::sync::OnceLock;

use num_traits::Zero;
use serde_json::json;

use super::{Composite, MsqcAssumption};
use crate::copositivity::{self, Mode};
use crate::error::{check_dim, Error, Result};
use crate::linprog;
use crate::numeric::linalg::{self, weighted_sum, Matrix, SymMatrix, Vector};
use crate::numeric::{ExtScalar, Scalar};
use crate::polyhedra::json::text_vector;
use crate::polyhedra::{json as pjson, Constraint, Polyhedron};
use crate::verdict::{Method, Outcome, Verdict, Witness};

/// Local data of a composite at a point of its domain, with the result of
/// the qualification check that licenses the chain rules.
#[derive(Debug)]
pub struct Site<'a> {
    pub composite: &'a Composite,
    pub x: Vector,
    pub y: Vector,
    pub jac: Matrix,
    pub hess: Vec<SymMatrix>,
    pub msqc: Verdict,
    pub opts: copositivity::Options,
    theta_sd: OnceLock<Polyhedron>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundedMultiplier {
    pub lambda: Vector,
    pub norm1: Scalar,
    /// ℓ + κ|v| + κℓ|∇f| in the ∞-norm, when both constants are given.
    pub bound: Option<Scalar>,
}

impl BoundedMultiplier {
    pub fn within_bound(&self) -> Option<bool> {
        self.bound.as_ref().map(|b| linalg::norm_inf(&self.lambda) <= *b)
    }
}

impl<'a> Site<'a> {
    pub fn new(composite: &'a Composite, x: &[Scalar], opts: copositivity::Options) -> Result<Site<'a>> {
        check_dim(composite.n(), x.len())?;
        let y = composite.f.eval(x)?;
        if !composite.theta.eval(&y)?.is_finite() {
            return Err(Error::NotInDomain("f(x) lies outside dom ϑ".into()));
        }
        let mut site = Site {
            composite,
            x: x.to_vec(),
            y,
            jac: composite.f.jacobian(x)?,
            hess: composite.f.hessians(x)?,
            msqc: Verdict::new(Outcome::Unknown, Method::Exact),
            opts,
            theta_sd: OnceLock::new(),
        };
        site.msqc = site.check_msqc()?;
        Ok(site)
    }

    pub fn n(&self) -> usize {
        self.composite.n()
    }

    pub fn m(&self) -> usize {
        self.composite.m()
    }

    pub fn licensed(&self) -> bool {
        self.msqc.is_holds()
    }

    pub fn require_license(&self) -> Result<()> {
        if self.licensed() {
            Ok(())
        } else {
            Err(Error::MsqcUnlicensed(
                self.msqc.detail.clone().unwrap_or_else(|| "qualification could not be established".into()),
            ))
        }
    }

    pub fn theta_subdifferential(&self) -> Result<&Polyhedron> {
        if let Some(p) = self.theta_sd.get() {
            return Ok(p);
        }
        let p = self.composite.theta.subdifferential(&self.y)?;
        Ok(self.theta_sd.get_or_init(|| p))
    }

    pub(crate) fn kernel_of_transpose(&self) -> Polyhedron {
        let eq: Vec<Vector> = (0..self.n()).map(|k| self.jac.col(k)).collect();
        Polyhedron::cone(self.m(), &[], &eq).expect("shape")
    }

    /// N_{dom ϑ}(f(x)) ∩ ker ∇f(x)ᵀ
    fn singular_multipliers(&self) -> Result<Polyhedron> {
        self.composite.theta.domain_normal(&self.y)?.intersect(&self.kernel_of_transpose())
    }

    pub fn check_metric_regularity(&self) -> Result<Verdict> {
        let c = self.singular_multipliers()?;
        let cert = json!({ "cone": pjson::to_json(&c) });
        Ok(match c.nonzero_element() {
            None => Verdict::holds(Method::MetricRegular).with_certificate(cert),
            Some(w) => Verdict::fails(Method::MetricRegular, Witness::Vector(w)).with_certificate(cert),
        })
    }

    /// Affine map, then metric regularity, then the second-order sufficient
    /// test on the extreme rays of the singular multiplier cone, then the
    /// user's assertion.
    pub fn check_msqc(&self) -> Result<Verdict> {
        if self.composite.assumptions.msqc == MsqcAssumption::Unknown {
            return Ok(Verdict::unknown(Method::UserAsserted, "qualification marked unknown in the input"));
        }
        if self.composite.f.is_affine() {
            return Ok(Verdict::holds(Method::AutoHoffman).with_detail("f is affine"));
        }
        let mr = self.check_metric_regularity()?;
        if mr.is_holds() {
            return Ok(Verdict::holds(Method::MetricRegular).with_sub(vec![mr]));
        }
        let gfrerer = self.gfrerer_test()?;
        if gfrerer.is_holds() {
            return Ok(gfrerer);
        }
        match self.composite.assumptions.msqc {
            MsqcAssumption::UserAsserted => Ok(Verdict::holds(Method::UserAsserted)
                .with_detail("asserted in the problem input")
                .with_sub(vec![mr, gfrerer])),
            _ => Ok(Verdict::unknown(Method::Gfrerer, "no sufficient condition for the qualification holds")
                .with_sub(vec![mr, gfrerer])),
        }
    }

    fn gfrerer_test(&self) -> Result<Verdict> {
        let c = self.singular_multipliers()?;
        let g = c.generators();
        if !g.lineality.is_empty() {
            return Ok(Verdict::unknown(Method::Gfrerer, "singular multiplier cone contains a line"));
        }
        let w_cone = self.composite.theta.domain_tangent(&self.y)?.preimage(&self.jac, &linalg::zeros(self.m()))?;
        let mut subs = Vec::new();
        let mut outcome = Outcome::Holds;
        for ray in &g.rays {
            let q = weighted_sum(&self.hess, &linalg::neg(ray), self.n());
            let r = copositivity::check_form(&q, &w_cone, Mode::Strict, &self.opts);
            let mut v = r.verdict.with_detail(format!("ray [{}]", text_vector(ray).join(", ")));
            v.method = Method::Gfrerer;
            if v.outcome != Outcome::Holds {
                outcome = Outcome::Unknown;
            }
            subs.push(v);
        }
        let mut v = Verdict::new(outcome, Method::Gfrerer)
            .with_certificate(json!({ "rays": g.rays.iter().map(|r| text_vector(r)).collect::<Vec<_>>() }))
            .with_sub(subs);
        if outcome == Outcome::Unknown {
            v.witness = v.sub_verdicts.iter().find_map(|s| s.witness.clone());
            v.detail = Some("a ray fails the strict sign test".into());
        }
        Ok(v)
    }

    pub fn subderivative(&self, w: &[Scalar]) -> Result<ExtScalar> {
        self.require_license()?;
        check_dim(self.n(), w.len())?;
        self.composite.theta.subderivative(&self.y, &self.jac.mul_vec(w)?)
    }

    /// ∇f(x)ᵀ ∂ϑ(f(x))
    pub fn subdifferential(&self) -> Result<Polyhedron> {
        self.require_license()?;
        self.theta_subdifferential()?.linear_image(&self.jac.transpose())
    }

    /// {λ ∈ ∂ϑ(f(x)) : ∇f(x)ᵀλ = v}
    pub fn multiplier_set(&self, v: &[Scalar]) -> Result<Polyhedron> {
        check_dim(self.n(), v.len())?;
        let mut eq = self.theta_subdifferential()?.eqs().to_vec();
        for k in 0..self.n() {
            eq.push(Constraint::new(self.jac.col(k), v[k].clone()));
        }
        Ok(Polyhedron::new(self.m(), self.theta_subdifferential()?.ineqs().to_vec(), eq)?.simplify())
    }

    /// Multiplier of least 1-norm, lexicographically smallest among ties.
    pub fn select_bounded_multiplier(&self, v: &[Scalar]) -> Result<BoundedMultiplier> {
        let lam = self.multiplier_set(v)?;
        if lam.is_empty() {
            return Err(Error::EmptyMultiplierSet);
        }
        let lambda = linprog::min_norm1(&lam).ok_or_else(|| Error::Invariant("minimum-norm multiplier LP has no optimum".into()))?;
        let a = &self.composite.assumptions;
        let bound = match (&a.kappa, &a.ell) {
            (Some(k), Some(l)) => Some(l + k * linalg::norm_inf(v) + k * l * self.jac.norm_inf()),
            _ => None,
        };
        Ok(BoundedMultiplier { norm1: linalg::norm1(&lambda), lambda, bound })
    }

    pub fn second_tangent_inner(&self, w: &[Scalar]) -> Result<crate::polyhedra::PolyUnion> {
        check_dim(self.n(), w.len())?;
        let d = self.jac.mul_vec(w)?;
        let theta = &self.composite.theta;
        let adm = theta.admissible(&self.y, &d)?;
        if adm.is_empty() {
            return Err(Error::NotAdmissible("∇f(x)w is not tangent to dom ϑ".into()));
        }
        let h = linalg::hessian_apply(&self.hess, w, w);
        let mut parts = Vec::new();
        for i in adm {
            let t2 = theta.pieces()[i].omega.second_tangent(&self.y, &d)?;
            parts.push(t2.preimage(&self.jac, &h)?);
        }
        Ok(crate::polyhedra::PolyUnion::new(self.n(), parts))
    }

    /// ∇²⟨λ, f⟩(x)
    pub fn weighted_hessian(&self, lambda: &[Scalar]) -> SymMatrix {
        weighted_sum(&self.hess, lambda, self.n())
    }

    pub fn zero_vector(&self) -> Vector {
        vec![Scalar::zero(); self.n()]
    }
}
