use super::site::{BoundedMultiplier, Site};
use crate::error::{check_dim, Error, Result};
use crate::linprog::{self, LpStatus, Sense};
use crate::numeric::linalg::{self, hessian_apply, Matrix, Vector};
use crate::numeric::{ExtScalar, Scalar};
use crate::polyhedra::{Constraint, PolyUnion, Polyhedron};
use crate::pwlq::CriticalCone;

/// Second-order data of a composite at (x, v): the multiplier set, the
/// selected multiplier and the critical cone.
#[derive(Debug)]
pub struct MultiplierAnalysis<'s, 'a> {
    pub site: &'s Site<'a>,
    pub v: Vector,
    pub multipliers: Polyhedron,
    pub selected: BoundedMultiplier,
    /// Critical cone of ϑ at (f(x), λ̄).
    pub theta_critical: CriticalCone,
    /// Critical cone of φ at (x, v) as {w : ∇f(x)w ∈ K_ϑ}.
    pub critical: Polyhedron,
    /// Per-piece preimages, tagged with the ϑ piece they come from.
    pub critical_pieces: Vec<(usize, Polyhedron)>,
    /// Another vertex of Λ used for independence checks, if there is one.
    pub alternate: Option<Vector>,
}

#[derive(Clone, Debug)]
pub struct MultiplierLp {
    pub value: Scalar,
    pub optimizer: Vector,
    pub face: Polyhedron,
}

#[derive(Clone, Debug)]
pub struct ParabolicDual {
    pub value: Scalar,
    pub z: Vector,
    pub piece: usize,
}

impl<'s, 'a> MultiplierAnalysis<'s, 'a> {
    pub fn new(site: &'s Site<'a>, v: &[Scalar]) -> Result<Self> {
        site.require_license()?;
        check_dim(site.n(), v.len())?;
        let multipliers = site.multiplier_set(v)?;
        if multipliers.is_empty() {
            return Err(Error::EmptyMultiplierSet);
        }
        let selected = site.select_bounded_multiplier(v)?;
        let theta = &site.composite.theta;
        let theta_critical = theta.critical_cone(&site.y, &selected.lambda)?;
        let zero = linalg::zeros(site.m());
        let critical = theta_critical.hull.preimage(&site.jac, &zero)?;
        let critical_pieces = theta_critical
            .pieces
            .iter()
            .map(|(i, k)| Ok((*i, k.preimage(&site.jac, &zero)?)))
            .collect::<Result<Vec<_>>>()?;
        let alternate = multipliers.generators().vertices.iter().find(|e| **e != selected.lambda).cloned();
        if let Some(alt) = &alternate {
            let other = theta.critical_cone(&site.y, alt)?.hull.preimage(&site.jac, &zero)?;
            if !other.set_eq(&critical) {
                return Err(Error::Invariant("critical cone depends on the chosen multiplier".into()));
            }
        }
        Ok(MultiplierAnalysis { site, v: v.to_vec(), multipliers, selected, theta_critical, critical, critical_pieces, alternate })
    }

    pub fn lambda(&self) -> &Vector {
        &self.selected.lambda
    }

    pub fn is_critical(&self, w: &[Scalar]) -> Result<bool> {
        self.critical.contains(w)
    }

    pub fn critical_union(&self) -> PolyUnion {
        PolyUnion::new(self.site.n(), self.critical_pieces.iter().map(|(_, p)| p.clone()).collect())
    }

    fn require_critical(&self, w: &[Scalar]) -> Result<()> {
        check_dim(self.site.n(), w.len())?;
        if !self.is_critical(w)? {
            return Err(Error::NotAdmissible("direction is not critical".into()));
        }
        Ok(())
    }

    /// max ⟨λ, ∇²f(x)(w, w)⟩ over Λ, with its optimal face.
    pub fn multiplier_lp(&self, w: &[Scalar]) -> Result<MultiplierLp> {
        self.require_critical(w)?;
        let h = hessian_apply(&self.site.hess, w, w);
        match linprog::optimal_face(&h, &self.multipliers, Sense::Max) {
            Some((r, face)) => Ok(MultiplierLp { value: r.value.expect("value"), optimizer: r.optimizer.expect("x"), face }),
            None => Err(Error::Invariant("multiplier LP is unbounded at a critical direction".into())),
        }
    }

    /// min over admissible pieces of the LP in z dual to the multiplier LP.
    pub fn parabolic_dual(&self, w: &[Scalar]) -> Result<ParabolicDual> {
        self.require_critical(w)?;
        let site = self.site;
        let theta = &site.composite.theta;
        let d = site.jac.mul_vec(w)?;
        let h = hessian_apply(&site.hess, w, w);
        let mut best: Option<ParabolicDual> = None;
        for i in theta.admissible(&site.y, &d)? {
            let piece = &theta.pieces()[i];
            let grad = piece.gradient(&site.y);
            let feasible = piece.omega.second_tangent(&site.y, &d)?.preimage(&site.jac, &h)?;
            let c = linalg::sub(&site.jac.tmul_vec(&grad)?, &self.v);
            let constant = linalg::dot(&grad, &h) + piece.quad.quad(&d);
            let r = linprog::solve(&c, &feasible, Sense::Min);
            match r.status {
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => return Err(Error::Invariant("parabolic dual LP is unbounded".into())),
                LpStatus::Optimal => {
                    let value = r.value.clone().expect("value") + constant;
                    if best.as_ref().map_or(true, |b| value < b.value) {
                        let face = feasible.with_eq(Constraint::new(c.clone(), r.value.expect("value")))?;
                        let z = linprog::min_norm1(&face).unwrap_or_else(|| r.optimizer.expect("z"));
                        best = Some(ParabolicDual { value, z, piece: i });
                    }
                }
            }
        }
        best.ok_or_else(|| Error::Invariant("no admissible piece gives a feasible parabolic LP".into()))
    }

    /// d²ϑ(f(x), λ̄)(∇f(x)w)
    pub fn theta_term(&self, w: &[Scalar]) -> Result<ExtScalar> {
        let d = self.site.jac.mul_vec(w)?;
        let t = self.site.composite.theta.second_subderivative(&self.site.y, self.lambda(), &d)?;
        if let Some(alt) = &self.alternate {
            let t2 = self.site.composite.theta.second_subderivative(&self.site.y, alt, &d)?;
            if t2 != t {
                return Err(Error::Invariant("second subderivative term depends on the chosen multiplier".into()));
            }
        }
        Ok(t)
    }

    /// d²φ(x, v)(w): +∞ off the critical cone.
    pub fn d2(&self, w: &[Scalar]) -> Result<ExtScalar> {
        check_dim(self.site.n(), w.len())?;
        if !self.is_critical(w)? {
            return Ok(ExtScalar::PosInf);
        }
        let t = self.theta_term(w)?;
        let lp = self.multiplier_lp(w)?;
        Ok(t + ExtScalar::Finite(lp.value))
    }

    /// Proto-derivative of ∂φ at (x, v) in direction w.
    pub fn proto_derivative(&self, w: &[Scalar]) -> Result<Polyhedron> {
        let site = self.site;
        let n = site.n();
        check_dim(n, w.len())?;
        if !self.is_critical(w)? {
            return Ok(Polyhedron::empty(n));
        }
        let face = self.multiplier_lp(w)?.face;
        let cols: Vec<Vector> = site.hess.iter().map(|h| h.apply(w)).collect();
        let curvature = Matrix::from_cols(n, &cols)?;
        let first = face.linear_image(&curvature)?;
        let d = site.jac.mul_vec(w)?;
        let inner = site.composite.theta.proto_derivative(&site.y, self.lambda(), &d)?;
        let second = inner.linear_image(&site.jac.transpose())?;
        first.minkowski_sum(&second)
    }

    /// Vertices of Λ; rays of Λ are reported separately by the callers that
    /// need to rule them out.
    pub fn multiplier_vertices(&self) -> &[Vector] {
        &self.multipliers.generators().vertices
    }
}
