use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::numeric::linalg::{self, dot, span_basis, sub, Matrix, SymMatrix, Vector};
use crate::numeric::{ExtScalar, Scalar};
use crate::polyhedra::{Constraint, PolyUnion, Polyhedron};

/// One quadratic piece: ½⟨A y, y⟩ + ⟨a, y⟩ + α on Ω.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub omega: Polyhedron,
    pub quad: SymMatrix,
    pub lin: Vector,
    pub constant: Scalar,
}

impl Piece {
    pub fn new(omega: Polyhedron, quad: SymMatrix, lin: Vector, constant: Scalar) -> Self {
        Piece { omega, quad, lin, constant }
    }

    pub fn value(&self, y: &[Scalar]) -> Scalar {
        self.quad.quad(y) / Scalar::from_integer(2.into()) + dot(&self.lin, y) + &self.constant
    }

    /// A y + a
    pub fn gradient(&self, y: &[Scalar]) -> Vector {
        linalg::add(&self.quad.apply(y), &self.lin)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convexity {
    Asserted,
    SampleChecked,
}

/// Convex piecewise linear-quadratic function on R^m.
#[derive(Clone, Debug, PartialEq)]
pub struct PwlqFunction {
    m: usize,
    pieces: Vec<Piece>,
    convexity: Convexity,
}

/// Critical cone as the union of its per-piece parts together with the
/// single convex cone it equals.
#[derive(Clone, Debug)]
pub struct CriticalCone {
    pub pieces: Vec<(usize, Polyhedron)>,
    pub hull: Polyhedron,
}

impl CriticalCone {
    pub fn contains(&self, w: &[Scalar]) -> Result<bool> {
        self.hull.contains(w)
    }

    pub fn union(&self) -> PolyUnion {
        PolyUnion::new(self.hull.dim(), self.pieces.iter().map(|(_, p)| p.clone()).collect())
    }
}

impl PwlqFunction {
    /// Validates dimensions, nonempty pieces and agreement on overlaps.
    pub fn new(m: usize, pieces: Vec<Piece>) -> Result<Self> {
        let f = Self::new_unchecked(m, pieces)?;
        for i in 0..f.pieces.len() {
            for j in i + 1..f.pieces.len() {
                if !pieces_agree(&f.pieces[i], &f.pieces[j])? {
                    return Err(Error::InconsistentPieces(i, j));
                }
            }
        }
        Ok(f)
    }

    /// Skips the pairwise overlap check; for constructions that are
    /// consistent by design.
    pub(crate) fn new_unchecked(m: usize, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Input("a piecewise function needs at least one piece".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            check_dim(m, p.omega.dim())?;
            check_dim(m, p.quad.dim())?;
            check_dim(m, p.lin.len())?;
            if p.omega.is_empty() {
                return Err(Error::InvalidPiece(i, "empty domain".into()));
            }
        }
        Ok(PwlqFunction { m, pieces, convexity: Convexity::Asserted })
    }

    /// δ_P
    pub fn indicator(p: Polyhedron) -> Result<Self> {
        let m = p.dim();
        Self::new_unchecked(m, vec![Piece::new(p, SymMatrix::zeros(m), linalg::zeros(m), Scalar::zero())])
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    pub fn eval(&self, y: &[Scalar]) -> Result<ExtScalar> {
        check_dim(self.m, y.len())?;
        for p in &self.pieces {
            if p.omega.contains(y)? {
                return Ok(ExtScalar::Finite(p.value(y)));
            }
        }
        Ok(ExtScalar::PosInf)
    }

    pub fn active(&self, y: &[Scalar]) -> Result<Vec<usize>> {
        check_dim(self.m, y.len())?;
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            if p.omega.contains(y)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    fn active_nonempty(&self, y: &[Scalar]) -> Result<Vec<usize>> {
        let a = self.active(y)?;
        if a.is_empty() {
            return Err(Error::NotInDomain("point lies outside every piece".into()));
        }
        Ok(a)
    }

    /// Pieces i in I(y) whose tangent cone at y contains w.
    pub fn admissible(&self, y: &[Scalar], w: &[Scalar]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for i in self.active_nonempty(y)? {
            if self.pieces[i].omega.tangent_contains(y, w)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    pub fn subderivative(&self, y: &[Scalar], w: &[Scalar]) -> Result<ExtScalar> {
        match self.admissible(y, w)?.first() {
            Some(&i) => Ok(ExtScalar::Finite(dot(&self.pieces[i].gradient(y), w))),
            None => Ok(ExtScalar::PosInf),
        }
    }

    /// {v : ⟨v, g⟩ <= ⟨A_i y + a_i, g⟩ for each generator g of each active
    /// tangent cone}, with equality on lineality generators.
    pub fn subdifferential(&self, y: &[Scalar]) -> Result<Polyhedron> {
        let mut ineq = Vec::new();
        let mut eq = Vec::new();
        for i in self.active_nonempty(y)? {
            let grad = self.pieces[i].gradient(y);
            let t = self.pieces[i].omega.tangent_cone(y)?;
            let g = t.generators();
            for r in &g.rays {
                ineq.push(Constraint::new(r.clone(), dot(&grad, r)));
            }
            for l in &g.lineality {
                eq.push(Constraint::new(l.clone(), dot(&grad, l)));
            }
        }
        Ok(Polyhedron::new(self.m, ineq, eq)?.simplify())
    }

    pub fn domain_normal(&self, y: &[Scalar]) -> Result<Polyhedron> {
        let mut acc: Option<Polyhedron> = None;
        for i in self.active_nonempty(y)? {
            let n = self.pieces[i].omega.normal_cone(y)?;
            acc = Some(match acc {
                None => n,
                Some(a) => a.intersect(&n)?,
            });
        }
        Ok(acc.expect("active set is nonempty"))
    }

    pub fn domain_tangent(&self, y: &[Scalar]) -> Result<Polyhedron> {
        Ok(self.domain_normal(y)?.polar_cone())
    }

    fn require_subgradient(&self, y: &[Scalar], u: &[Scalar]) -> Result<()> {
        check_dim(self.m, u.len())?;
        if !self.subdifferential(y)?.contains(u)? {
            return Err(Error::NotSubgradient("vector is not in the subdifferential".into()));
        }
        Ok(())
    }

    pub fn second_subderivative(&self, y: &[Scalar], u: &[Scalar], w: &[Scalar]) -> Result<ExtScalar> {
        self.require_subgradient(y, u)?;
        for i in self.admissible(y, w)? {
            let shifted = sub(u, &self.pieces[i].gradient(y));
            if dot(&shifted, w).is_zero() {
                return Ok(ExtScalar::Finite(self.pieces[i].quad.quad(w)));
            }
        }
        Ok(ExtScalar::PosInf)
    }

    /// Per-piece parts T_{Ω_i}(y) ∩ {u - A_i y - a_i}⊥ and their convex hull
    /// N_{∂ϑ(y)}(u). Fails with an invariant violation if the two disagree.
    pub fn critical_cone(&self, y: &[Scalar], u: &[Scalar]) -> Result<CriticalCone> {
        let sd = self.subdifferential(y)?;
        if !sd.contains(u)? {
            return Err(Error::NotSubgradient("vector is not in the subdifferential".into()));
        }
        let mut pieces = Vec::new();
        for i in self.active_nonempty(y)? {
            let shifted = sub(u, &self.pieces[i].gradient(y));
            let k = self.pieces[i].omega.tangent_cone(y)?.with_eq(Constraint::new(shifted, Scalar::zero()))?;
            pieces.push((i, k));
        }
        let hull = sd.normal_cone(u)?;
        let cc = CriticalCone { pieces, hull };
        let union = cc.union();
        if !union.inside(&cc.hull) {
            return Err(Error::Invariant("a critical piece leaves the normal cone of the subdifferential".into()));
        }
        let g = cc.hull.generators();
        for v in g.rays.iter().chain(&g.lineality).chain(g.lineality.iter().map(|l| linalg::neg(l)).collect::<Vec<_>>().iter()) {
            if !union.contains(v)? {
                return Err(Error::Invariant("critical pieces do not cover the normal cone of the subdifferential".into()));
            }
        }
        Ok(cc)
    }

    pub fn parabolic_subderivative(&self, y: &[Scalar], w: &[Scalar], z: &[Scalar]) -> Result<ExtScalar> {
        check_dim(self.m, z.len())?;
        let adm = self.admissible(y, w)?;
        if adm.is_empty() {
            return Err(Error::NotAdmissible("direction is outside the domain of the subderivative".into()));
        }
        let mut best = ExtScalar::PosInf;
        for i in adm {
            let p = &self.pieces[i];
            let t = p.omega.tangent_cone(y)?;
            if t.tangent_contains(w, z)? {
                let v = dot(&p.gradient(y), z) + p.quad.quad(w);
                best = best.min(ExtScalar::Finite(v));
            }
        }
        Ok(best)
    }

    pub fn second_tangent_domain(&self, y: &[Scalar], w: &[Scalar]) -> Result<PolyUnion> {
        let mut parts = Vec::new();
        for i in self.admissible(y, w)? {
            parts.push(self.pieces[i].omega.second_tangent(y, w)?);
        }
        Ok(PolyUnion::new(self.m, parts))
    }

    /// Proto-derivative of ∂ϑ at (y, u) in direction w: the intersection of
    /// {A_i w} + N_{K_i}(w) over the critical pieces K_i that contain w.
    pub fn proto_derivative(&self, y: &[Scalar], u: &[Scalar], w: &[Scalar]) -> Result<Polyhedron> {
        check_dim(self.m, w.len())?;
        let cc = self.critical_cone(y, u)?;
        let mut acc: Option<Polyhedron> = None;
        for (i, k) in &cc.pieces {
            if !k.contains(w)? {
                continue;
            }
            let part = k.normal_cone(w)?.translate(&self.pieces[*i].quad.apply(w))?;
            acc = Some(match acc {
                None => part,
                Some(a) => a.intersect(&part)?,
            });
        }
        Ok(acc.unwrap_or_else(|| Polyhedron::empty(self.m)))
    }

    /// The function w ↦ ½ d²ϑ(y, u)(w) as a piecewise quadratic in its own
    /// right, built from the critical pieces.
    pub fn half_second_subderivative(&self, y: &[Scalar], u: &[Scalar]) -> Result<PwlqFunction> {
        let cc = self.critical_cone(y, u)?;
        let pieces = cc
            .pieces
            .into_iter()
            .filter(|(_, k)| !k.is_empty())
            .map(|(i, k)| Piece::new(k, self.pieces[i].quad.clone(), linalg::zeros(self.m), Scalar::zero()))
            .collect();
        Self::new_unchecked(self.m, pieces)
    }

    /// The composition w ↦ self(M w + c) for an m×n matrix M.
    pub fn compose_affine(&self, m: &Matrix, c: &[Scalar]) -> Result<PwlqFunction> {
        let n = m.cols();
        let mut pieces = Vec::new();
        for p in &self.pieces {
            let omega = p.omega.preimage(m, c)?;
            if omega.is_empty() {
                continue;
            }
            let quad = p.quad.congruence(m);
            let lin = m.tmul_vec(&p.gradient(c))?;
            pieces.push(Piece::new(omega, quad, lin, p.value(c)));
        }
        if pieces.is_empty() {
            return Err(Error::Input("affine map misses the domain".into()));
        }
        Self::new_unchecked(n, pieces)
    }

    /// Random midpoint-convexity test on points drawn from the domain.
    pub fn check_convexity_sampled(&mut self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vector> = (0..samples).map(|_| self.sample_point(&mut rng)).collect();
        let two = Scalar::from_integer(2.into());
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let mid: Vector = pts[a].iter().zip(&pts[b]).map(|(x, y)| (x + y) / &two).collect();
                let fa = self.eval(&pts[a])?;
                let fb = self.eval(&pts[b])?;
                let fm = self.eval(&mid)?;
                let (ExtScalar::Finite(fa), ExtScalar::Finite(fb)) = (fa, fb) else { continue };
                let bound = ExtScalar::Finite((fa + fb) / &two);
                if fm > bound {
                    return Err(Error::Input(format!("midpoint convexity fails between samples {a} and {b}")));
                }
            }
        }
        self.convexity = Convexity::SampleChecked;
        Ok(())
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vector {
        let p = &self.pieces[rng.gen_range(0..self.pieces.len())];
        let g = p.omega.generators();
        let mut x = linalg::zeros(self.m);
        let k = g.vertices.len();
        let weights: Vec<u32> = (0..k).map(|_| rng.gen_range(1..5)).collect();
        let total: u32 = weights.iter().sum();
        for (v, w) in g.vertices.iter().zip(&weights) {
            x = linalg::axpy(&x, &Scalar::new((*w).into(), total.into()), v);
        }
        for r in &g.rays {
            x = linalg::axpy(&x, &Scalar::from_integer(rng.gen_range(0..3).into()), r);
        }
        for l in &g.lineality {
            x = linalg::axpy(&x, &Scalar::from_integer(rng.gen_range(-2..3).into()), l);
        }
        x
    }
}

/// Two pieces agree on Ω_i ∩ Ω_j iff their difference vanishes on its affine
/// hull, checked exactly through a parametrization p0 + B t.
fn pieces_agree(a: &Piece, b: &Piece) -> Result<bool> {
    let mut ineq = a.omega.ineqs().to_vec();
    ineq.extend(b.omega.ineqs().iter().cloned());
    let mut eq = a.omega.eqs().to_vec();
    eq.extend(b.omega.eqs().iter().cloned());
    let inter = Polyhedron::new(a.omega.dim(), ineq, eq)?;
    let g = inter.generators();
    let Some(p0) = g.vertices.first() else {
        return Ok(true);
    };
    let n = inter.dim();
    let mut dirs: Vec<Vector> = g.vertices[1..].iter().map(|v| sub(v, p0)).collect();
    dirs.extend(g.rays.iter().cloned());
    dirs.extend(g.lineality.iter().cloned());
    let basis = span_basis(n, &dirs);
    if a.value(p0) != b.value(p0) {
        return Ok(false);
    }
    if basis.is_empty() {
        return Ok(true);
    }
    let bm = Matrix::from_cols(n, &basis)?;
    let dq = a.quad.add(&b.quad.scaled(&-Scalar::one()));
    let lin = linalg::add(&dq.apply(p0), &sub(&a.lin, &b.lin));
    Ok(linalg::is_zero(&bm.tmul_vec(&lin)?) && dq.congruence(&bm).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linalg::from_ints;
    use crate::numeric::{int, rat};

    /// |y| as two linear pieces.
    fn abs1() -> PwlqFunction {
        PwlqFunction::new(
            1,
            vec![
                Piece::new(Polyhedron::from_int_ineqs(1, &[&[-1, 0]], &[]), SymMatrix::zeros(1), from_ints(&[1]), int(0)),
                Piece::new(Polyhedron::from_int_ineqs(1, &[&[1, 0]], &[]), SymMatrix::zeros(1), from_ints(&[-1]), int(0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn abs_first_order() {
        let f = abs1();
        assert_eq!(f.eval(&[int(-3)]).unwrap(), ExtScalar::Finite(int(3)));
        assert_eq!(f.subderivative(&[int(0)], &[int(-2)]).unwrap(), ExtScalar::Finite(int(2)));
        let sd = f.subdifferential(&[int(0)]).unwrap();
        assert!(sd.set_eq(&Polyhedron::from_int_ineqs(1, &[&[1, 1], &[-1, 1]], &[])));
    }

    #[test]
    fn abs_second_order() {
        let f = abs1();
        let y = [int(0)];
        let u = [rat(1, 2)];
        assert_eq!(f.second_subderivative(&y, &u, &[int(0)]).unwrap(), ExtScalar::Finite(int(0)));
        assert_eq!(f.second_subderivative(&y, &u, &[int(1)]).unwrap(), ExtScalar::PosInf);
        let cc = f.critical_cone(&y, &[int(1)]).unwrap();
        assert!(cc.hull.set_eq(&Polyhedron::from_int_ineqs(1, &[&[-1, 0]], &[])));
        assert!(f.second_subderivative(&y, &[int(2)], &[int(0)]).is_err());
    }

    #[test]
    fn inconsistent_pieces_rejected() {
        let bad = PwlqFunction::new(
            1,
            vec![
                Piece::new(Polyhedron::from_int_ineqs(1, &[&[-1, 0]], &[]), SymMatrix::zeros(1), from_ints(&[1]), int(0)),
                Piece::new(Polyhedron::from_int_ineqs(1, &[&[1, 0]], &[]), SymMatrix::zeros(1), from_ints(&[-1]), int(1)),
            ],
        );
        assert_eq!(bad.unwrap_err(), Error::InconsistentPieces(0, 1));
    }

    #[test]
    fn indicator_of_orthant() {
        let f = PwlqFunction::indicator(Polyhedron::orthant(2, false)).unwrap();
        let y = from_ints(&[0, 0]);
        assert_eq!(f.eval(&from_ints(&[1, 0])).unwrap(), ExtScalar::PosInf);
        assert!(f.subdifferential(&y).unwrap().set_eq(&Polyhedron::orthant(2, true)));
        let z = f.second_tangent_domain(&y, &from_ints(&[0, -1])).unwrap();
        assert_eq!(z.pieces.len(), 1);
        assert!(z.pieces[0].set_eq(&Polyhedron::from_int_ineqs(2, &[&[1, 0, 0]], &[])));
        assert_eq!(
            f.parabolic_subderivative(&y, &from_ints(&[0, -1]), &from_ints(&[-1, 5])).unwrap(),
            ExtScalar::Finite(int(0))
        );
        assert_eq!(f.parabolic_subderivative(&y, &from_ints(&[0, -1]), &from_ints(&[1, 5])).unwrap(), ExtScalar::PosInf);
    }

    #[test]
    fn proto_derivative_of_abs() {
        let f = abs1();
        let y = [int(0)];
        // u = 1 is the right end of [-1, 1]; K = [0, inf).
        let d = f.proto_derivative(&y, &[int(1)], &[int(0)]).unwrap();
        assert!(d.set_eq(&Polyhedron::from_int_ineqs(1, &[&[1, 0]], &[])));
        let d = f.proto_derivative(&y, &[int(1)], &[int(1)]).unwrap();
        assert!(d.is_singleton());
        assert!(f.proto_derivative(&y, &[int(1)], &[int(-1)]).unwrap().is_empty());
    }

    #[test]
    fn sampled_convexity() {
        let mut f = abs1();
        f.check_convexity_sampled(12, 7).unwrap();
        assert_eq!(f.convexity(), Convexity::SampleChecked);
        let mut concave = PwlqFunction::new(
            1,
            vec![
                Piece::new(Polyhedron::from_int_ineqs(1, &[&[-1, 0]], &[]), SymMatrix::zeros(1), from_ints(&[-1]), int(0)),
                Piece::new(Polyhedron::from_int_ineqs(1, &[&[1, 0]], &[]), SymMatrix::zeros(1), from_ints(&[1]), int(0)),
            ],
        )
        .unwrap();
        assert!(concave.check_convexity_sampled(12, 7).is_err());
    }
}
