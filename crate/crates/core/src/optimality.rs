//! Stationarity and second-order conditions for φ₀ + ϑ∘f.

use serde_json::json;

use crate::composite::{Composite, MultiplierAnalysis, Site};
use crate::copositivity::{self, MaxQuadOnCone, Mode};
use crate::error::{check_dim, Error, Result};
use crate::numeric::linalg::{self, weighted_sum, SymMatrix, Vector};
use crate::numeric::scalar::{fmt_scalar, one};
use crate::numeric::{ExtScalar, Polynomial, Scalar};
use crate::polyhedra::json::text_vector;
use crate::polyhedra::{PolyUnion, Polyhedron};
use crate::verdict::{Method, Outcome, Verdict, Witness};

#[derive(Clone, Debug)]
pub struct CompositeProblem {
    pub objective: Polynomial,
    pub composite: Composite,
}

impl CompositeProblem {
    pub fn new(objective: Polynomial, composite: Composite) -> Result<Self> {
        check_dim(composite.n(), objective.nvars())?;
        Ok(CompositeProblem { objective, composite })
    }

    /// ψ = φ₀ + φ
    pub fn eval(&self, x: &[Scalar]) -> Result<ExtScalar> {
        Ok(ExtScalar::Finite(self.objective.eval(x)?) + self.composite.eval(x)?)
    }
}

/// Second-order verdict together with the growth constant when one is certified.
#[derive(Clone, Debug)]
pub struct SocResult {
    pub verdict: Verdict,
    /// ℓ with ψ(x) >= ψ(x̄) + ℓ|x - x̄|² near x̄.
    pub growth: Option<Scalar>,
}

impl SocResult {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.verdict.to_json();
        if let Some(g) = &self.growth {
            v["growth_constant"] = json!(fmt_scalar(g));
        }
        v
    }
}

/// Problem data at a candidate point.
#[derive(Debug)]
pub struct ProblemSite<'a> {
    pub problem: &'a CompositeProblem,
    pub site: Site<'a>,
    pub grad: Vector,
    pub hess: SymMatrix,
}

impl<'a> ProblemSite<'a> {
    pub fn new(problem: &'a CompositeProblem, x: &[Scalar], opts: copositivity::Options) -> Result<Self> {
        let site = Site::new(&problem.composite, x, opts)?;
        Ok(ProblemSite { problem, grad: problem.objective.gradient(x)?, hess: problem.objective.hessian(x)?, site })
    }

    /// -∇φ₀(x̄)
    pub fn target(&self) -> Vector {
        linalg::neg(&self.grad)
    }

    /// ∇²_xx L(x̄, λ) = ∇²φ₀(x̄) + Σ λ_k ∇²f_k(x̄)
    pub fn lagrangian_hessian(&self, lambda: &[Scalar]) -> SymMatrix {
        self.hess.add(&weighted_sum(&self.site.hess, lambda, self.site.n()))
    }

    pub fn stationarity(&self) -> Result<Verdict> {
        self.site.require_license()?;
        let v = self.target();
        let lam = self.site.multiplier_set(&v)?;
        if lam.is_empty() {
            return Ok(Verdict::fails(Method::Exact, Witness::Vector(v))
                .with_detail("-∇φ₀(x̄) is not in the subdifferential of the composite"));
        }
        let sel = self.site.select_bounded_multiplier(&v)?;
        Ok(Verdict::holds(Method::Exact).with_certificate(json!({ "multiplier": text_vector(&sel.lambda) })))
    }

    fn analysis(&self) -> Result<MultiplierAnalysis<'_, 'a>> {
        if !self.stationarity()?.is_holds() {
            return Err(Error::NotStationary);
        }
        MultiplierAnalysis::new(&self.site, &self.target())
    }

    /// Recession directions of Λ must not improve ⟨λ, ∇²f(w, w)⟩ anywhere
    /// on the critical cone; otherwise the vertex maximum is not the maximum.
    fn rays_non_improving(&self, ma: &MultiplierAnalysis) -> Verdict {
        let g = ma.multipliers.generators();
        let n = self.site.n();
        let mut checks: Vec<(SymMatrix, String)> = Vec::new();
        for r in &g.rays {
            checks.push((weighted_sum(&self.site.hess, &linalg::neg(r), n), format!("ray [{}]", text_vector(r).join(", "))));
        }
        for l in &g.lineality {
            let q = weighted_sum(&self.site.hess, l, n);
            checks.push((q.scaled(&-one()), format!("line [{}]", text_vector(l).join(", "))));
            checks.push((q, format!("line -[{}]", text_vector(l).join(", "))));
        }
        let mut subs = Vec::new();
        let mut outcome = Outcome::Holds;
        for (q, label) in checks {
            if q.is_zero() {
                continue;
            }
            let r = copositivity::check_form(&q, &ma.critical, Mode::Nonstrict, &self.site.opts);
            match r.verdict.outcome {
                Outcome::Holds => {}
                Outcome::Fails => outcome = Outcome::Fails,
                Outcome::Unknown if outcome == Outcome::Holds => outcome = Outcome::Unknown,
                Outcome::Unknown => {}
            }
            subs.push(r.verdict.with_detail(label));
        }
        Verdict::new(outcome, Method::Copositivity).with_sub(subs)
    }

    /// Forms per critical piece: the ϑ-piece curvature pulled back through
    /// ∇f plus the Lagrangian Hessian at each multiplier in `lambdas`.
    fn piece_problems(&self, pieces: &[(usize, Polyhedron)], lambdas: &[Vector]) -> Vec<MaxQuadOnCone> {
        let theta = &self.site.composite.theta;
        pieces
            .iter()
            .map(|(i, cone)| {
                let base = theta.pieces()[*i].quad.congruence(&self.site.jac);
                let forms = lambdas.iter().map(|l| base.add(&self.lagrangian_hessian(l))).collect();
                MaxQuadOnCone { forms, cone: PolyUnion::new(cone.dim(), vec![cone.clone()]) }
            })
            .collect()
    }

    fn sign_check(&self, problems: &[MaxQuadOnCone], mode: Mode) -> (Verdict, Option<Scalar>) {
        let results: Vec<_> = problems.iter().map(|q| copositivity::check_sign_on_cone(q, mode, &self.site.opts)).collect();
        let mut outcome = Outcome::Holds;
        let mut witness = None;
        let mut growth: Option<Scalar> = None;
        let mut growth_ok = true;
        for r in &results {
            match r.verdict.outcome {
                Outcome::Fails => {
                    outcome = Outcome::Fails;
                    if witness.is_none() {
                        witness = r.verdict.witness.clone();
                    }
                }
                Outcome::Unknown if outcome == Outcome::Holds => outcome = Outcome::Unknown,
                _ => {}
            }
            match (&r.lower_bound, &growth) {
                (Some(c), Some(g)) if c >= g => {}
                (Some(c), _) => growth = Some(c.clone()),
                (None, _) => growth_ok = false,
            }
        }
        let mut v = Verdict::new(outcome, Method::SecondOrder).with_sub(results.iter().map(|r| r.verdict.clone()).collect());
        v.witness = witness;
        let growth = if outcome == Outcome::Holds && growth_ok && mode == Mode::Strict {
            growth.map(|c| c / Scalar::from_integer(4.into()))
        } else {
            None
        };
        (v, growth)
    }

    fn soc(&self, mode: Mode) -> Result<SocResult> {
        let ma = self.analysis()?;
        let rays = self.rays_non_improving(&ma);
        match rays.outcome {
            Outcome::Holds => {}
            Outcome::Fails => {
                return Err(Error::Invariant("a recession direction of the multiplier set improves the LP on the critical cone".into()))
            }
            Outcome::Unknown => {
                return Ok(SocResult {
                    verdict: Verdict::unknown(Method::SecondOrder, "recession directions of the multiplier set could not be ruled out")
                        .with_sub(vec![rays]),
                    growth: None,
                })
            }
        }
        let vertices = ma.multiplier_vertices().to_vec();
        let problems = self.piece_problems(&ma.critical_pieces, &vertices);
        let (mut verdict, growth) = self.sign_check(&problems, mode);
        verdict.certificate = Some(json!({
            "multiplier_vertices": vertices.iter().map(|e| text_vector(e)).collect::<Vec<_>>(),
            "critical_pieces": ma.critical_pieces.len(),
        }));
        if verdict.is_holds() && mode == Mode::Strict {
            verdict.detail = Some("x̄ is a strict local minimizer with quadratic growth".into());
        }
        Ok(SocResult { verdict, growth })
    }

    pub fn necessary_soc(&self) -> Result<SocResult> {
        self.soc(Mode::Nonstrict)
    }

    /// Strict check; a Holds result is cross-checked against the
    /// nonstrict one.
    pub fn sufficient_soc(&self) -> Result<SocResult> {
        let strict = self.soc(Mode::Strict)?;
        if strict.verdict.is_holds() && !self.soc(Mode::Nonstrict)?.verdict.is_holds() {
            return Err(Error::Invariant("strict second-order condition holds but the nonstrict one does not".into()));
        }
        Ok(strict)
    }

    /// ⟨∇²φ₀(x̄)w, w⟩ + d²φ(x̄, v̄)(w), the second subderivative of ψ at (x̄, 0).
    pub fn d2_total(&self, w: &[Scalar]) -> Result<ExtScalar> {
        let ma = self.analysis()?;
        Ok(ExtScalar::Finite(self.hess.quad(w)) + ma.d2(w)?)
    }

    /// max over vertices e of Λ of the piece form at w; +∞ off the critical cone.
    pub fn soc_value(&self, w: &[Scalar]) -> Result<ExtScalar> {
        let ma = self.analysis()?;
        if !ma.is_critical(w)? {
            return Ok(ExtScalar::PosInf);
        }
        let best = ma
            .multiplier_vertices()
            .iter()
            .map(|e| self.lagrangian_hessian(e).quad(w))
            .max()
            .ok_or_else(|| Error::Invariant("multiplier set has no vertex".into()))?;
        Ok(ma.theta_term(w)? + ExtScalar::Finite(best))
    }
}
