use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};

use super::dd::cone_generators;
use crate::error::{check_dim, Error, Result};
use crate::linprog::{self, LpStatus, Sense};
use crate::numeric::linalg::{self, dot, primitive, primitive_signed, rank_of, sub, zeros, Matrix, Vector};
use crate::numeric::Scalar;

/// A linear inequality `row·x <= rhs` or equality `row·x = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Constraint {
    pub row: Vector,
    pub rhs: Scalar,
}

impl Constraint {
    pub fn new(row: Vector, rhs: Scalar) -> Self {
        Constraint { row, rhs }
    }

    fn canonical(&self, signed: bool) -> Constraint {
        let mut all = self.row.clone();
        all.push(self.rhs.clone());
        let p = if signed { primitive_signed(&all) } else { primitive(&all) };
        let rhs = p[p.len() - 1].clone();
        Constraint { row: p[..p.len() - 1].to_vec(), rhs }
    }

    fn slack(&self, x: &[Scalar]) -> Scalar {
        &self.rhs - dot(&self.row, x)
    }
}

/// V-representation: P = conv(vertices) + cone(rays) + span(lineality).
/// Vertices and rays lie in the orthogonal complement of the lineality
/// space. An empty polyhedron has no vertices, rays or lineality.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Generators {
    pub vertices: Vec<Vector>,
    pub rays: Vec<Vector>,
    pub lineality: Vec<Vector>,
}

#[derive(Clone, Debug)]
pub struct Polyhedron {
    dim: usize,
    ineq: Vec<Constraint>,
    eq: Vec<Constraint>,
    gens: OnceLock<Generators>,
}

impl PartialEq for Polyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.ineq == other.ineq && self.eq == other.eq
    }
}

impl Polyhedron {
    pub fn new(dim: usize, ineq: Vec<Constraint>, eq: Vec<Constraint>) -> Result<Self> {
        for c in ineq.iter().chain(&eq) {
            check_dim(dim, c.row.len())?;
        }
        Ok(Self::raw(dim, ineq, eq))
    }

    fn raw(dim: usize, ineq: Vec<Constraint>, eq: Vec<Constraint>) -> Self {
        let mut ineq: Vec<Constraint> = ineq.iter().map(|c| c.canonical(false)).collect();
        let mut eq: Vec<Constraint> = eq.iter().map(|c| c.canonical(true)).collect();
        ineq.retain(|c| !(linalg::is_zero(&c.row) && !c.rhs.is_negative()));
        eq.retain(|c| !(linalg::is_zero(&c.row) && c.rhs.is_zero()));
        ineq.sort_by(|a, b| b.cmp(a));
        ineq.dedup();
        eq.sort_by(|a, b| b.cmp(a));
        eq.dedup();
        if ineq.iter().any(|c| linalg::is_zero(&c.row)) || eq.iter().any(|c| linalg::is_zero(&c.row)) {
            return Self::empty(dim);
        }
        Polyhedron { dim, ineq, eq, gens: OnceLock::new() }
    }

    /// From integer rows `[a..., b]` meaning `a·x <= b`.
    pub fn from_int_ineqs(dim: usize, rows: &[&[i64]], eq_rows: &[&[i64]]) -> Self {
        let conv = |rows: &[&[i64]]| -> Vec<Constraint> {
            rows.iter()
                .map(|r| {
                    let v = linalg::from_ints(r);
                    Constraint::new(v[..dim].to_vec(), v[dim].clone())
                })
                .collect()
        };
        Self::new(dim, conv(rows), conv(eq_rows)).expect("row length")
    }

    pub fn full(dim: usize) -> Self {
        Self::raw(dim, Vec::new(), Vec::new())
    }

    pub fn empty(dim: usize) -> Self {
        let c = Constraint::new(zeros(dim), -Scalar::one());
        let p = Polyhedron { dim, ineq: vec![c], eq: Vec::new(), gens: OnceLock::new() };
        let _ = p.gens.set(Generators::default());
        p
    }

    pub fn point(x: &[Scalar]) -> Self {
        let n = x.len();
        let eq = (0..n).map(|i| Constraint::new(linalg::unit(n, i), x[i].clone())).collect();
        Self::raw(n, Vec::new(), eq)
    }

    /// The cone {x : rows·x <= 0}.
    pub fn cone(dim: usize, ineq_rows: &[Vector], eq_rows: &[Vector]) -> Result<Self> {
        let c = |rows: &[Vector]| rows.iter().map(|r| Constraint::new(r.clone(), Scalar::zero())).collect();
        Self::new(dim, c(ineq_rows), c(eq_rows))
    }

    /// Nonnegative orthant {x >= 0} or nonpositive orthant when `nonneg` is false.
    pub fn orthant(dim: usize, nonneg: bool) -> Self {
        let s = if nonneg { -Scalar::one() } else { Scalar::one() };
        let rows: Vec<Vector> = (0..dim).map(|i| linalg::scale(&s, &linalg::unit(dim, i))).collect();
        Self::cone(dim, &rows, &[]).expect("shape")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ineqs(&self) -> &[Constraint] {
        &self.ineq
    }

    pub fn eqs(&self) -> &[Constraint] {
        &self.eq
    }

    pub fn is_cone(&self) -> bool {
        self.ineq.iter().chain(&self.eq).all(|c| c.rhs.is_zero())
    }

    pub fn contains(&self, x: &[Scalar]) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(self.ineq.iter().all(|c| !c.slack(x).is_negative()) && self.eq.iter().all(|c| c.slack(x).is_zero()))
    }

    /// Whether `r` is a recession direction.
    pub fn contains_direction(&self, r: &[Scalar]) -> bool {
        self.ineq.iter().all(|c| !dot(&c.row, r).is_positive()) && self.eq.iter().all(|c| dot(&c.row, r).is_zero())
    }

    fn contains_line(&self, l: &[Scalar]) -> bool {
        self.ineq.iter().chain(&self.eq).all(|c| dot(&c.row, l).is_zero())
    }

    pub fn generators(&self) -> &Generators {
        self.gens.get_or_init(|| self.compute_generators())
    }

    fn compute_generators(&self) -> Generators {
        let n = self.dim;
        let lift = |c: &Constraint| {
            let mut r = c.row.clone();
            r.push(-c.rhs.clone());
            r
        };
        let mut ineq: Vec<Vector> = self.ineq.iter().map(lift).collect();
        let mut nonneg = zeros(n + 1);
        nonneg[n] = -Scalar::one();
        ineq.push(nonneg);
        let eq: Vec<Vector> = self.eq.iter().map(lift).collect();
        let cg = cone_generators(n + 1, &ineq, &eq);
        let mut vertices = Vec::new();
        let mut rays = Vec::new();
        for r in cg.rays {
            let s = r[n].clone();
            if s.is_positive() {
                vertices.push(r[..n].iter().map(|x| x / &s).collect::<Vector>());
            } else {
                rays.push(r[..n].to_vec());
            }
        }
        if vertices.is_empty() {
            return Generators::default();
        }
        let lineality: Vec<Vector> = cg.lineality.into_iter().map(|l| primitive_signed(&l[..n])).collect();
        vertices.sort_by(|a, b| b.cmp(a));
        rays.sort_by(|a, b| b.cmp(a));
        Generators { vertices, rays, lineality }
    }

    /// Builds the H-representation of conv(V) + cone(R) + span(L). The result
    /// is irredundant: every inequality is a facet.
    pub fn from_generators(dim: usize, g: &Generators) -> Result<Self> {
        for v in g.vertices.iter().chain(&g.rays).chain(&g.lineality) {
            check_dim(dim, v.len())?;
        }
        if g.vertices.is_empty() {
            return Ok(Self::empty(dim));
        }
        // Cone of valid inequalities (a, β): a·v <= β, a·r <= 0, a·l = 0.
        let mut ineq = Vec::new();
        for v in &g.vertices {
            let mut r = v.clone();
            r.push(-Scalar::one());
            ineq.push(r);
        }
        for r in &g.rays {
            let mut x = r.clone();
            x.push(Scalar::zero());
            ineq.push(x);
        }
        let eq: Vec<Vector> = g
            .lineality
            .iter()
            .map(|l| {
                let mut x = l.clone();
                x.push(Scalar::zero());
                x
            })
            .collect();
        let cg = cone_generators(dim + 1, &ineq, &eq);
        let split = |v: &Vector| Constraint::new(v[..dim].to_vec(), v[dim].clone());
        let ineqs = cg.rays.iter().map(split).filter(|c| !linalg::is_zero(&c.row)).collect();
        let eqs = cg.lineality.iter().map(split).collect();
        let p = Self::raw(dim, ineqs, eqs);
        Ok(p)
    }

    pub fn is_empty(&self) -> bool {
        self.generators().vertices.is_empty()
    }

    /// Dimension of the affine hull, `None` when empty.
    pub fn affine_dim(&self) -> Option<usize> {
        let g = self.generators();
        let v0 = g.vertices.first()?;
        let mut dirs: Vec<Vector> = g.vertices[1..].iter().map(|v| sub(v, v0)).collect();
        dirs.extend(g.rays.iter().cloned());
        dirs.extend(g.lineality.iter().cloned());
        Some(rank_of(self.dim, &dirs))
    }

    pub fn is_singleton(&self) -> bool {
        self.affine_dim() == Some(0)
    }

    /// True when the set is {0} (a cone with no nonzero element).
    pub fn is_trivial_cone(&self) -> bool {
        let g = self.generators();
        g.rays.is_empty() && g.lineality.is_empty() && g.vertices.iter().all(|v| linalg::is_zero(v)) && !g.vertices.is_empty()
    }

    /// A nonzero element of a cone, preferring extreme rays.
    pub fn nonzero_element(&self) -> Option<Vector> {
        let g = self.generators();
        g.rays.first().or_else(|| g.lineality.first()).cloned()
    }

    pub fn tangent_cone(&self, x: &[Scalar]) -> Result<Polyhedron> {
        if !self.contains(x)? {
            return Err(Error::NotInDomain("tangent cone requested at a point outside the set".into()));
        }
        let ineq: Vec<Vector> = self.ineq.iter().filter(|c| c.slack(x).is_zero()).map(|c| c.row.clone()).collect();
        let eq: Vec<Vector> = self.eq.iter().map(|c| c.row.clone()).collect();
        Polyhedron::cone(self.dim, &ineq, &eq)
    }

    /// Membership of `w` in the tangent cone at `x`, without building it.
    pub fn tangent_contains(&self, x: &[Scalar], w: &[Scalar]) -> Result<bool> {
        check_dim(self.dim, w.len())?;
        if !self.contains(x)? {
            return Ok(false);
        }
        Ok(self.ineq.iter().filter(|c| c.slack(x).is_zero()).all(|c| !dot(&c.row, w).is_positive())
            && self.eq.iter().all(|c| dot(&c.row, w).is_zero()))
    }

    pub fn normal_cone(&self, x: &[Scalar]) -> Result<Polyhedron> {
        Ok(self.tangent_cone(x)?.polar_cone())
    }

    /// Polar of a cone: {v : ⟨v, r⟩ <= 0 for every element r}.
    pub fn polar_cone(&self) -> Polyhedron {
        debug_assert!(self.is_cone() || self.is_empty());
        let g = self.generators();
        Polyhedron::cone(self.dim, &g.rays, &g.lineality).expect("shape")
    }

    /// T_{T_P(x)}(w)
    pub fn second_tangent(&self, x: &[Scalar], w: &[Scalar]) -> Result<Polyhedron> {
        let t = self.tangent_cone(x)?;
        if !t.contains(w)? {
            return Err(Error::NotAdmissible("direction is not tangent".into()));
        }
        t.tangent_cone(w)
    }

    /// {M x : x in P} for a k×dim matrix M.
    pub fn linear_image(&self, m: &Matrix) -> Result<Polyhedron> {
        check_dim(self.dim, m.cols())?;
        let g = self.generators();
        if g.vertices.is_empty() {
            return Ok(Self::empty(m.rows()));
        }
        let map = |vs: &[Vector]| -> Result<Vec<Vector>> { vs.iter().map(|v| m.mul_vec(v)).collect() };
        let lin: Vec<Vector> = map(&g.lineality)?;
        let image = Generators { vertices: map(&g.vertices)?, rays: map(&g.rays)?, lineality: lin };
        Self::from_generators(m.rows(), &image)
    }

    /// {x : M x + offset in P} for a dim×k matrix M.
    pub fn preimage(&self, m: &Matrix, offset: &[Scalar]) -> Result<Polyhedron> {
        check_dim(self.dim, m.rows())?;
        check_dim(self.dim, offset.len())?;
        let pull = |c: &Constraint| -> Result<Constraint> {
            Ok(Constraint::new(m.tmul_vec(&c.row)?, &c.rhs - dot(&c.row, offset)))
        };
        let ineq = self.ineq.iter().map(pull).collect::<Result<_>>()?;
        let eq = self.eq.iter().map(pull).collect::<Result<_>>()?;
        Polyhedron::new(m.cols(), ineq, eq)
    }

    /// {x + v : x in P}
    pub fn translate(&self, v: &[Scalar]) -> Result<Polyhedron> {
        check_dim(self.dim, v.len())?;
        let shift = |c: &Constraint| Constraint::new(c.row.clone(), &c.rhs + dot(&c.row, v));
        Polyhedron::new(self.dim, self.ineq.iter().map(shift).collect(), self.eq.iter().map(shift).collect())
    }

    pub fn minkowski_sum(&self, other: &Polyhedron) -> Result<Polyhedron> {
        check_dim(self.dim, other.dim)?;
        let (a, b) = (self.generators(), other.generators());
        if a.vertices.is_empty() || b.vertices.is_empty() {
            return Ok(Self::empty(self.dim));
        }
        let mut vertices = Vec::new();
        for u in &a.vertices {
            for v in &b.vertices {
                vertices.push(linalg::add(u, v));
            }
        }
        let rays = a.rays.iter().chain(&b.rays).cloned().collect();
        let lineality = a.lineality.iter().chain(&b.lineality).cloned().collect();
        Self::from_generators(self.dim, &Generators { vertices, rays, lineality })
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron> {
        check_dim(self.dim, other.dim)?;
        let ineq = self.ineq.iter().chain(&other.ineq).cloned().collect();
        let eq = self.eq.iter().chain(&other.eq).cloned().collect();
        Ok(Polyhedron::new(self.dim, ineq, eq)?.simplify())
    }

    /// Cartesian product P × Q.
    pub fn product(&self, other: &Polyhedron) -> Polyhedron {
        let (n1, n2) = (self.dim, other.dim);
        let widen = |c: &Constraint, left: bool| {
            let mut row = zeros(n1 + n2);
            let off = if left { 0 } else { n1 };
            for (i, v) in c.row.iter().enumerate() {
                row[off + i] = v.clone();
            }
            Constraint::new(row, c.rhs.clone())
        };
        let ineq = self.ineq.iter().map(|c| widen(c, true)).chain(other.ineq.iter().map(|c| widen(c, false))).collect();
        let eq = self.eq.iter().map(|c| widen(c, true)).chain(other.eq.iter().map(|c| widen(c, false))).collect();
        Self::raw(n1 + n2, ineq, eq)
    }

    pub fn with_ineq(&self, c: Constraint) -> Result<Polyhedron> {
        let mut ineq = self.ineq.clone();
        ineq.push(c);
        Polyhedron::new(self.dim, ineq, self.eq.clone())
    }

    pub fn with_eq(&self, c: Constraint) -> Result<Polyhedron> {
        let mut eq = self.eq.clone();
        eq.push(c);
        Polyhedron::new(self.dim, self.ineq.clone(), eq)
    }

    /// Removes redundant inequalities with one LP per row and dependent
    /// equalities by rank.
    pub fn simplify(&self) -> Polyhedron {
        if linprog::feasible_point(self).is_none() {
            return Self::empty(self.dim);
        }
        let mut eq: Vec<Constraint> = Vec::new();
        for c in &self.eq {
            let mut rows: Vec<Vector> = eq.iter().map(|e| e.row.clone()).collect();
            rows.push(c.row.clone());
            if rank_of(self.dim, &rows) == rows.len() {
                eq.push(c.clone());
            }
        }
        let mut ineq = self.ineq.clone();
        let mut i = 0;
        while i < ineq.len() {
            let mut others = ineq.clone();
            let c = others.remove(i);
            let rest = Polyhedron::raw(self.dim, others.clone(), eq.clone());
            let r = linprog::solve(&c.row, &rest, Sense::Max);
            let redundant = match r.status {
                LpStatus::Optimal => r.value.as_ref().map_or(false, |v| *v <= c.rhs),
                LpStatus::Infeasible => true,
                LpStatus::Unbounded => false,
            };
            if redundant {
                ineq = others;
            } else {
                i += 1;
            }
        }
        Self::raw(self.dim, ineq, eq)
    }

    /// Whether `other` ⊆ self, checked on generators.
    pub fn includes(&self, other: &Polyhedron) -> bool {
        let g = other.generators();
        g.vertices.iter().all(|v| self.contains(v).unwrap_or(false))
            && g.rays.iter().all(|r| self.contains_direction(r))
            && g.lineality.iter().all(|l| self.contains_line(l))
    }

    /// Equality as point sets.
    pub fn set_eq(&self, other: &Polyhedron) -> bool {
        self.dim == other.dim && self.includes(other) && other.includes(self)
    }
}

/// Finite union of polyhedra of the same ambient dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyUnion {
    pub dim: usize,
    pub pieces: Vec<Polyhedron>,
}

impl PolyUnion {
    pub fn new(dim: usize, pieces: Vec<Polyhedron>) -> Self {
        let pieces = pieces.into_iter().filter(|p| !p.is_empty()).collect();
        PolyUnion { dim, pieces }
    }

    pub fn contains(&self, x: &[Scalar]) -> Result<bool> {
        for p in &self.pieces {
            if p.contains(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Whether every piece lies inside `hull`.
    pub fn inside(&self, hull: &Polyhedron) -> bool {
        self.pieces.iter().all(|p| hull.includes(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linalg::from_ints;
    use crate::numeric::{int, rat};

    fn square() -> Polyhedron {
        Polyhedron::from_int_ineqs(2, &[&[1, 0, 1], &[-1, 0, 0], &[0, 1, 1], &[0, -1, 0]], &[])
    }

    #[test]
    fn unit_square_vertices() {
        let g = square().generators().clone();
        assert_eq!(g.vertices.len(), 4);
        assert!(g.rays.is_empty() && g.lineality.is_empty());
        assert_eq!(square().affine_dim(), Some(2));
    }

    #[test]
    fn round_trip_generators() {
        let p = Polyhedron::from_int_ineqs(3, &[&[1, 1, 0, 2], &[-1, 0, 0, 0], &[0, -1, 0, 0], &[1, 1, 0, 3]], &[]);
        let q = Polyhedron::from_generators(3, p.generators()).unwrap();
        assert!(p.set_eq(&q));
        assert_eq!(q.ineqs().len(), 3, "redundant row removed");
        assert_eq!(q.generators().lineality, vec![from_ints(&[0, 0, 1])]);
    }

    #[test]
    fn empty_and_singleton() {
        let e = Polyhedron::from_int_ineqs(1, &[&[1, 0], &[-1, -1]], &[]);
        assert!(e.is_empty());
        assert_eq!(e.affine_dim(), None);
        let s = Polyhedron::point(&[rat(1, 2), int(3)]);
        assert!(s.is_singleton());
        assert_eq!(s.generators().vertices, vec![vec![rat(1, 2), int(3)]]);
    }

    #[test]
    fn tangent_and_normal_at_corner() {
        let t = square().tangent_cone(&from_ints(&[0, 0])).unwrap();
        assert!(t.set_eq(&Polyhedron::orthant(2, true)));
        let n = square().normal_cone(&from_ints(&[0, 0])).unwrap();
        assert!(n.set_eq(&Polyhedron::orthant(2, false)));
        let mid = square().normal_cone(&[rat(1, 2), rat(1, 2)]).unwrap();
        assert!(mid.is_trivial_cone());
    }

    #[test]
    fn polar_of_polar_is_identity() {
        let c = Polyhedron::cone(3, &[from_ints(&[1, -2, 0]), from_ints(&[0, 1, -1])], &[]).unwrap();
        assert!(c.polar_cone().polar_cone().set_eq(&c));
    }

    #[test]
    fn image_and_sum() {
        let m = Matrix::from_int_rows(&[&[1, 1]]);
        let img = square().linear_image(&m).unwrap();
        assert!(img.set_eq(&Polyhedron::from_int_ineqs(1, &[&[1, 2], &[-1, 0]], &[])));
        let s = square().minkowski_sum(&square()).unwrap();
        assert!(s.contains(&from_ints(&[2, 2])).unwrap());
        assert!(!s.contains(&[rat(5, 2), int(0)]).unwrap());
    }

    #[test]
    fn intersect_removes_redundancy() {
        let h = Polyhedron::from_int_ineqs(2, &[&[1, 1, 5]], &[]);
        let p = square().intersect(&h).unwrap();
        assert_eq!(p.ineqs().len(), 4);
    }

    #[test]
    fn second_tangent_of_orthant() {
        let o = Polyhedron::orthant(2, false);
        let t2 = o.second_tangent(&from_ints(&[0, 0]), &from_ints(&[-1, 0])).unwrap();
        assert!(t2.set_eq(&Polyhedron::from_int_ineqs(2, &[&[0, 1, 0]], &[])));
    }
}
