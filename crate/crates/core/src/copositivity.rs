//! Sign of w ↦ max_j ⟨Q_j w, w⟩ on a finite union of polyhedral cones.
//!
//! Each cone is written as the image of a nonnegative orthant under a matrix
//! G of generators (lineality split by sign pattern), which turns the
//! question into copositivity of GᵀQ_jG over the standard simplex. The
//! simplex is bisected until a per-leaf certificate or a witness appears.

use num_traits::{Signed, Zero};
use serde_json::json;

use crate::exec::{self, Execution};
use crate::numeric::linalg::{self, span_basis, Matrix, SymMatrix, Vector};
use crate::numeric::scalar::fmt_scalar;
use crate::numeric::Scalar;
use crate::polyhedra::{PolyUnion, Polyhedron};
use crate::verdict::{Method, Outcome, Verdict, Witness};

pub const DEFAULT_DEPTH_CAP: u32 = 12;
pub const DEPTH_CAP_ENV: &str = "VAMKIT_DEPTH_CAP";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// max_j ⟨Q_j w, w⟩ > 0 for every nonzero w in the cone.
    Strict,
    /// max_j ⟨Q_j w, w⟩ >= 0 on the cone.
    Nonstrict,
}

#[derive(Clone, Debug)]
pub struct MaxQuadOnCone {
    pub forms: Vec<SymMatrix>,
    pub cone: PolyUnion,
}

impl MaxQuadOnCone {
    pub fn value(&self, w: &[Scalar]) -> Scalar {
        self.forms.iter().map(|q| q.quad(w)).max().unwrap_or_else(Scalar::zero)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub depth_cap: u32,
    /// Grid resolution of the last-resort falsification sweep.
    pub grid: u32,
    pub execution: Execution,
}

impl Default for Options {
    fn default() -> Self {
        Options { depth_cap: DEFAULT_DEPTH_CAP, grid: 6, execution: exec::default_mode() }
    }
}

impl Options {
    pub fn from_env() -> Self {
        let mut o = Options::default();
        if let Some(cap) = std::env::var(DEPTH_CAP_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            o.depth_cap = cap;
        }
        o
    }
}

#[derive(Clone, Debug)]
pub struct CopositivityResult {
    pub verdict: Verdict,
    /// c > 0 with max_j ⟨Q_j w, w⟩ >= c |w|² on the cone, when the
    /// certificate yields one.
    pub lower_bound: Option<Scalar>,
}

enum LeafOutcome {
    Certified(Option<Scalar>),
    Witness(Vector),
    Unresolved(Matrix),
}

struct PieceReport {
    outcome: Outcome,
    witness: Option<Vector>,
    leaves: usize,
    unresolved: usize,
    span_definite: bool,
    lower_bound: Option<Scalar>,
}

pub fn check_sign_on_cone(q: &MaxQuadOnCone, mode: Mode, opts: &Options) -> CopositivityResult {
    let reports = exec::map(opts.execution, &q.cone.pieces, |p| check_piece(&q.forms, p, mode, opts));
    let mut cert = Vec::new();
    let mut outcome = Outcome::Holds;
    let mut witness = None;
    let mut lb: Option<Scalar> = Some(Scalar::zero());
    let mut first = true;
    for r in &reports {
        cert.push(json!({
            "outcome": r.outcome,
            "leaves": r.leaves,
            "unresolved": r.unresolved,
            "span_definite": r.span_definite,
        }));
        match r.outcome {
            Outcome::Fails => {
                if witness.is_none() {
                    witness = r.witness.clone();
                }
                outcome = Outcome::Fails;
            }
            Outcome::Unknown if outcome == Outcome::Holds => outcome = Outcome::Unknown,
            _ => {}
        }
        lb = match (lb, &r.lower_bound) {
            (Some(a), Some(b)) => Some(if first || b < &a { b.clone() } else { a }),
            _ => None,
        };
        first = false;
    }
    let certificate = json!({ "mode": format!("{mode:?}"), "pieces": cert });
    let verdict = match outcome {
        Outcome::Fails => Verdict::fails(Method::Copositivity, Witness::Vector(witness.expect("witness for failure"))),
        Outcome::Holds => Verdict::holds(Method::Copositivity),
        Outcome::Unknown => Verdict::unknown(Method::Copositivity, "depth cap reached without certificate or witness"),
    }
    .with_certificate(certificate);
    let lower_bound = match (mode, outcome) {
        (Mode::Strict, Outcome::Holds) if !first => lb.filter(|c| c.is_positive()),
        _ => None,
    };
    CopositivityResult { verdict, lower_bound }
}

fn violates(v: &Scalar, mode: Mode) -> bool {
    match mode {
        Mode::Strict => !v.is_positive(),
        Mode::Nonstrict => v.is_negative(),
    }
}

fn check_piece(forms: &[SymMatrix], cone: &Polyhedron, mode: Mode, opts: &Options) -> PieceReport {
    let mut rep = PieceReport { outcome: Outcome::Holds, witness: None, leaves: 0, unresolved: 0, span_definite: false, lower_bound: None };
    if cone.is_empty() || cone.is_trivial_cone() {
        return rep;
    }
    let n = cone.dim();
    let g = cone.generators();
    let value = |w: &[Scalar]| forms.iter().map(|q| q.quad(w)).max().expect("at least one form");

    // Extreme rays, lineality directions and pairwise sums.
    let mut probes: Vec<Vector> = g.rays.clone();
    for l in &g.lineality {
        probes.push(l.clone());
        probes.push(linalg::neg(l));
    }
    let base = probes.clone();
    for a in 0..base.len() {
        for b in a + 1..base.len() {
            let s = linalg::add(&base[a], &base[b]);
            if !linalg::is_zero(&s) {
                probes.push(s);
            }
        }
    }
    for w in &probes {
        if violates(&value(w), mode) {
            rep.outcome = Outcome::Fails;
            rep.witness = Some(w.clone());
            return rep;
        }
    }

    // Definiteness of a single form on the linear span.
    let mut span_gens = g.rays.clone();
    span_gens.extend(g.lineality.iter().cloned());
    let basis = span_basis(n, &span_gens);
    let bm = Matrix::from_cols(n, &basis).expect("basis shape");
    for q in forms {
        let r = q.congruence(&bm);
        let ok = match mode {
            Mode::Strict => r.is_positive_definite(),
            Mode::Nonstrict => r.is_positive_semidefinite(),
        };
        if ok {
            rep.span_definite = true;
            rep.leaves = 1;
            if mode == Mode::Strict {
                rep.lower_bound = span_lower_bound(q, &bm);
            }
            return rep;
        }
    }

    // Pointed generator sets, one per sign pattern of the lineality basis.
    let nl = g.lineality.len();
    let mut lb: Option<Scalar> = None;
    let mut lb_valid = true;
    for pattern in 0..(1usize << nl) {
        let mut gens = g.rays.clone();
        for (k, l) in g.lineality.iter().enumerate() {
            gens.push(if pattern >> k & 1 == 1 { linalg::neg(l) } else { l.clone() });
        }
        let gm = Matrix::from_cols(n, &gens).expect("generator shape");
        let reduced: Vec<SymMatrix> = forms.iter().map(|q| q.congruence(&gm)).collect();
        let k = gens.len();
        let mut stack = vec![(Matrix::identity(k), 0u32)];
        while let Some((simplex, depth)) = stack.pop() {
            match examine_leaf(&reduced, &simplex, mode) {
                LeafOutcome::Witness(mu) => {
                    rep.outcome = Outcome::Fails;
                    rep.witness = Some(linalg::primitive(&gm.mul_vec(&mu).expect("shape")));
                    return rep;
                }
                LeafOutcome::Certified(leaf_lb) => {
                    rep.leaves += 1;
                    match leaf_lb {
                        Some(c) => {
                            let radius = (0..k).map(|j| linalg::norm_inf(&gm.mul_vec(&simplex.col(j)).expect("shape"))).max().expect("vertex");
                            let scaled = c / (radius.clone() * radius * Scalar::from_integer(n.into()));
                            lb = Some(match lb {
                                Some(a) if a < scaled => a,
                                _ => scaled,
                            });
                        }
                        None => lb_valid = false,
                    }
                }
                LeafOutcome::Unresolved(s) => {
                    if depth >= opts.depth_cap {
                        rep.leaves += 1;
                        if let Some(mu) = grid_sweep(&reduced, &s, mode, opts.grid) {
                            rep.outcome = Outcome::Fails;
                            rep.witness = Some(linalg::primitive(&gm.mul_vec(&mu).expect("shape")));
                            return rep;
                        }
                        rep.unresolved += 1;
                        continue;
                    }
                    let (a, b) = split(&s);
                    stack.push((b, depth + 1));
                    stack.push((a, depth + 1));
                }
            }
        }
    }
    if rep.unresolved > 0 {
        rep.outcome = Outcome::Unknown;
    } else if mode == Mode::Strict && lb_valid {
        rep.lower_bound = lb;
    }
    rep
}

/// Columns of `simplex` are the vertices (in simplex coordinates μ).
fn examine_leaf(forms: &[SymMatrix], simplex: &Matrix, mode: Mode) -> LeafOutcome {
    let k = simplex.cols();
    let local: Vec<SymMatrix> = forms.iter().map(|q| q.congruence(simplex)).collect();
    for m in &local {
        if let Some(lb) = pair_certificate(m, mode) {
            return LeafOutcome::Certified(lb);
        }
    }
    let two = Scalar::from_integer(2.into());
    for i in 0..k {
        let v = local.iter().map(|m| m.get(i, i).clone()).max().expect("form");
        if violates(&v, mode) {
            return LeafOutcome::Witness(simplex.col(i));
        }
        for j in i + 1..k {
            // value at the edge midpoint, times 4
            let v = local.iter().map(|m| m.get(i, i) + m.get(j, j) + &two * m.get(i, j)).max().expect("form");
            if violates(&v, mode) {
                return LeafOutcome::Witness(linalg::add(&simplex.col(i), &simplex.col(j)));
            }
        }
    }
    LeafOutcome::Unresolved(simplex.clone())
}

/// Sufficient condition for (strict) copositivity of M: splitting the
/// diagonal evenly over the k-1 pairs each index belongs to, every 2×2
/// pair form is copositive. Returns the certified lower bound on the
/// simplex when one is available.
fn pair_certificate(m: &SymMatrix, mode: Mode) -> Option<Option<Scalar>> {
    let k = m.dim();
    let diag_ok = |d: &Scalar| match mode {
        Mode::Strict => d.is_positive(),
        Mode::Nonstrict => !d.is_negative(),
    };
    if !(0..k).all(|i| diag_ok(m.get(i, i))) {
        return None;
    }
    let share = Scalar::from_integer(((k.max(2) - 1) as i64).into());
    let share_sq = &share * &share;
    let mut off_nonneg = true;
    for i in 0..k {
        for j in i + 1..k {
            let o = m.get(i, j);
            if !o.is_negative() {
                continue;
            }
            off_nonneg = false;
            let prod = m.get(i, i) * m.get(j, j);
            let lhs = o * o * &share_sq;
            let ok = match mode {
                Mode::Strict => lhs < prod,
                Mode::Nonstrict => lhs <= prod,
            };
            if !ok {
                return None;
            }
        }
    }
    let lb = if off_nonneg && mode == Mode::Strict {
        let dmin = (0..k).map(|i| m.get(i, i).clone()).min().expect("nonempty");
        Some(dmin / Scalar::from_integer((k as i64).into()))
    } else {
        None
    };
    Some(lb)
}

/// Bisects the longest edge (1-norm, first in index order on ties).
fn split(s: &Matrix) -> (Matrix, Matrix) {
    let k = s.cols();
    let mut best = (0, 1);
    let mut best_len = Scalar::from_integer((-1).into());
    for i in 0..k {
        for j in i + 1..k {
            let len = linalg::norm1(&linalg::sub(&s.col(i), &s.col(j)));
            if len > best_len {
                best_len = len;
                best = (i, j);
            }
        }
    }
    let (i, j) = best;
    let half = Scalar::new(1.into(), 2.into());
    let mid = linalg::scale(&half, &linalg::add(&s.col(i), &s.col(j)));
    let replace = |col: usize| {
        let mut cols: Vec<Vector> = (0..k).map(|c| s.col(c)).collect();
        cols[col] = mid.clone();
        Matrix::from_cols(s.rows(), &cols).expect("shape")
    };
    (replace(j), replace(i))
}

fn grid_sweep(forms: &[SymMatrix], simplex: &Matrix, mode: Mode, grid: u32) -> Option<Vector> {
    let k = simplex.cols();
    let mut found = None;
    let mut alpha = vec![0u32; k];
    compositions(k, grid, 0, &mut alpha, &mut |a| {
        if found.is_some() {
            return;
        }
        let weights: Vector = a.iter().map(|&x| Scalar::from_integer(x.into())).collect();
        let mu = simplex.mul_vec(&weights).expect("shape");
        let v = forms.iter().map(|q| q.quad(&mu)).max().expect("form");
        if violates(&v, mode) {
            found = Some(mu);
        }
    });
    found
}

fn compositions(k: usize, left: u32, idx: usize, cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
    if idx + 1 == k {
        cur[idx] = left;
        f(cur);
        return;
    }
    for v in 0..=left {
        cur[idx] = v;
        compositions(k, left - v, idx + 1, cur, f);
    }
}

/// Largest c of the form 2^-j · s (s = smallest diagonal entry of BᵀQB
/// scaled by BᵀB) with Bᵀ(Q - c I)B positive semidefinite.
fn span_lower_bound(q: &SymMatrix, b: &Matrix) -> Option<Scalar> {
    let r = q.congruence(b);
    let gram = SymMatrix::identity(q.dim()).congruence(b);
    let k = r.dim();
    let mut c = (0..k).map(|i| r.get(i, i) / gram.get(i, i)).min()?;
    for _ in 0..64 {
        if r.add(&gram.scaled(&-c.clone())).is_positive_semidefinite() && c.is_positive() {
            return Some(c);
        }
        c /= Scalar::from_integer(2.into());
    }
    None
}

pub fn lower_bound_text(c: &Option<Scalar>) -> Option<String> {
    c.as_ref().map(fmt_scalar)
}

/// Copositivity of a single form on one cone; a convenience wrapper.
pub fn check_form(q: &SymMatrix, cone: &Polyhedron, mode: Mode, opts: &Options) -> CopositivityResult {
    let problem = MaxQuadOnCone { forms: vec![q.clone()], cone: PolyUnion::new(cone.dim(), vec![cone.clone()]) };
    check_sign_on_cone(&problem, mode, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linalg::from_ints;
    use crate::numeric::int;

    fn opts() -> Options {
        Options { execution: Execution::Sequential, ..Options::default() }
    }

    fn on_cone(forms: Vec<SymMatrix>, cone: Polyhedron) -> MaxQuadOnCone {
        let d = cone.dim();
        MaxQuadOnCone { forms, cone: PolyUnion::new(d, vec![cone]) }
    }

    #[test]
    fn identity_on_orthant() {
        let q = on_cone(vec![SymMatrix::identity(2)], Polyhedron::orthant(2, true));
        let r = check_sign_on_cone(&q, Mode::Strict, &opts());
        assert_eq!(r.verdict.outcome, Outcome::Holds);
        assert!(r.lower_bound.is_some());
    }

    #[test]
    fn indefinite_but_copositive() {
        // w1 w2 >= 0 on the orthant, strictly positive only off the axes.
        let q = on_cone(vec![SymMatrix::from_int_rows(&[&[0, 1], &[1, 0]])], Polyhedron::orthant(2, true));
        assert_eq!(check_sign_on_cone(&q, Mode::Nonstrict, &opts()).verdict.outcome, Outcome::Holds);
        let r = check_sign_on_cone(&q, Mode::Strict, &opts());
        assert_eq!(r.verdict.outcome, Outcome::Fails);
        let w = r.verdict.witness.unwrap().vector().unwrap().clone();
        assert!(q.value(&w) <= int(0));
    }

    #[test]
    fn subdivision_finds_interior_zero() {
        // I - (J - I)/2 vanishes at (1,1,1) and nowhere else on the orthant.
        let h = crate::numeric::rat(-1, 2);
        let rows = vec![vec![int(1), h.clone(), h.clone()], vec![h.clone(), int(1), h.clone()], vec![h.clone(), h.clone(), int(1)]];
        let q = SymMatrix::from_full(&Matrix::from_rows(3, &rows).unwrap()).unwrap();
        let c = on_cone(vec![q], Polyhedron::orthant(3, true));
        let r = check_sign_on_cone(&c, Mode::Strict, &opts());
        assert_eq!(r.verdict.outcome, Outcome::Fails);
        assert_eq!(r.verdict.witness.unwrap().vector().unwrap(), &from_ints(&[1, 1, 1]));
        assert_eq!(check_sign_on_cone(&c, Mode::Nonstrict, &opts()).verdict.outcome, Outcome::Holds);
    }

    #[test]
    fn negative_off_diagonal_certified() {
        let q = SymMatrix::from_full(&Matrix::from_rows(2, &[vec![int(1), crate::numeric::rat(-7, 8)], vec![crate::numeric::rat(-7, 8), int(1)]]).unwrap()).unwrap();
        let c = on_cone(vec![q], Polyhedron::orthant(2, true));
        assert_eq!(check_sign_on_cone(&c, Mode::Strict, &opts()).verdict.outcome, Outcome::Holds);
    }

    #[test]
    fn max_of_two_forms() {
        // Neither w1² - w2² nor w2² - w1² is copositive; their max is |w1² - w2²|,
        // which vanishes on the diagonal.
        let a = SymMatrix::diag(&from_ints(&[1, -1]));
        let b = SymMatrix::diag(&from_ints(&[-1, 1]));
        let c = on_cone(vec![a, b], Polyhedron::orthant(2, true));
        assert_eq!(check_sign_on_cone(&c, Mode::Nonstrict, &opts()).verdict.outcome, Outcome::Holds);
        let r = check_sign_on_cone(&c, Mode::Strict, &opts());
        assert_eq!(r.verdict.outcome, Outcome::Fails);
    }

    #[test]
    fn lineality_split_by_sign() {
        // {w1 = 0} in R^3 with forms diag(0,1,2) and diag(0,2,1).
        let cone = Polyhedron::from_int_ineqs(3, &[], &[&[1, 0, 0, 0]]);
        let c = on_cone(vec![SymMatrix::diag(&from_ints(&[0, 1, 2])), SymMatrix::diag(&from_ints(&[0, 2, 1]))], cone);
        let r = check_sign_on_cone(&c, Mode::Strict, &opts());
        assert_eq!(r.verdict.outcome, Outcome::Holds);
        assert!(r.lower_bound.unwrap().is_positive());
    }

    #[test]
    fn negative_direction_found() {
        let cone = Polyhedron::full(2);
        let c = on_cone(vec![SymMatrix::diag(&from_ints(&[1, -1]))], cone);
        let r = check_sign_on_cone(&c, Mode::Nonstrict, &opts());
        assert_eq!(r.verdict.outcome, Outcome::Fails);
        let w = r.verdict.witness.unwrap().vector().unwrap().clone();
        assert!(c.value(&w) < int(0));
    }

    #[test]
    fn trivial_cone_is_vacuous() {
        let c = on_cone(vec![SymMatrix::diag(&from_ints(&[-1]))], Polyhedron::point(&from_ints(&[0])));
        assert_eq!(check_sign_on_cone(&c, Mode::Strict, &opts()).verdict.outcome, Outcome::Holds);
    }
}
