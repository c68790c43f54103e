//! Exact two-phase simplex with Bland's rule over free variables.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::numeric::linalg::{dot, zeros, Vector};
use crate::numeric::Scalar;
use crate::polyhedra::{Constraint, Polyhedron};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub value: Option<Scalar>,
    pub optimizer: Option<Vector>,
    /// Direction along which the objective improves without bound.
    pub ray: Option<Vector>,
}

struct Tableau {
    rows: Vec<Vec<Scalar>>,
    rhs: Vec<Scalar>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        self.basis[r] = col;
    }

    fn reduced_costs(&self, c: &[Scalar], ncols: usize) -> Vec<Scalar> {
        (0..ncols)
            .map(|j| {
                let cb = self.rows.iter().zip(&self.basis).fold(Scalar::zero(), |acc, (row, &b)| acc + &c[b] * &row[j]);
                &c[j] - cb
            })
            .collect()
    }

    /// Maximizes c·z over the current columns. Returns the entering column of
    /// an unbounded ray when one is found.
    fn run(&mut self, c: &[Scalar], ncols: usize) -> Option<usize> {
        loop {
            let rc = self.reduced_costs(c, ncols);
            let Some(enter) = (0..ncols).find(|&j| rc[j].is_positive() && !self.basis.contains(&j)) else {
                return None;
            };
            let mut best: Option<(usize, Scalar)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Some(enter),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }

    fn solution(&self, ncols: usize) -> Vec<Scalar> {
        let mut z = zeros(ncols);
        for (i, &b) in self.basis.iter().enumerate() {
            if b < ncols {
                z[b] = self.rhs[i].clone();
            }
        }
        z
    }
}

/// Optimizes `c·x` over `p`.
pub fn solve(c: &[Scalar], p: &Polyhedron, sense: Sense) -> LpResult {
    let n = p.dim();
    assert_eq!(c.len(), n, "objective length");
    let obj: Vec<Scalar> = match sense {
        Sense::Max => c.to_vec(),
        Sense::Min => c.iter().map(|v| -v).collect(),
    };
    let ineq = p.ineqs();
    let eq = p.eqs();
    let nslack = ineq.len();
    let m = ineq.len() + eq.len();
    let ncols = 2 * n + nslack;
    let total = ncols + m;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let all: Vec<(&Constraint, Option<usize>)> =
        ineq.iter().enumerate().map(|(i, c)| (c, Some(i))).chain(eq.iter().map(|c| (c, None))).collect();
    for (r, (con, slack)) in all.iter().enumerate() {
        let mut row = zeros(total);
        for k in 0..n {
            row[k] = con.row[k].clone();
            row[n + k] = -con.row[k].clone();
        }
        if let Some(s) = slack {
            row[2 * n + s] = Scalar::from_integer(1.into());
        }
        let mut b = con.rhs.clone();
        if b.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            b = -b;
        }
        row[ncols + r] = Scalar::from_integer(1.into());
        rows.push(row);
        rhs.push(b);
    }
    let mut t = Tableau { rows, rhs, basis: (ncols..total).collect() };

    // Phase 1: maximize -Σ artificials.
    let mut c1 = zeros(total);
    for v in c1.iter_mut().skip(ncols) {
        *v = -Scalar::from_integer(1.into());
    }
    t.run(&c1, total);
    let infeas = t.basis.iter().zip(&t.rhs).any(|(&b, v)| b >= ncols && v.is_positive());
    if infeas {
        return LpResult { status: LpStatus::Infeasible, value: None, optimizer: None, ray: None };
    }
    // Drive zero-level artificials out, dropping redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= ncols {
            if let Some(j) = (0..ncols).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
                i += 1;
            } else {
                t.rows.remove(i);
                t.rhs.remove(i);
                t.basis.remove(i);
            }
        } else {
            i += 1;
        }
    }
    for row in t.rows.iter_mut() {
        row.truncate(ncols);
    }

    let mut c2 = zeros(ncols);
    for k in 0..n {
        c2[k] = obj[k].clone();
        c2[n + k] = -obj[k].clone();
    }
    let to_x = |z: &[Scalar]| -> Vector { (0..n).map(|k| &z[k] - &z[n + k]).collect() };
    if let Some(enter) = t.run(&c2, ncols) {
        let mut d = zeros(ncols);
        d[enter] = Scalar::from_integer(1.into());
        for (i, &b) in t.basis.iter().enumerate() {
            d[b] = -t.rows[i][enter].clone();
        }
        let ray = to_x(&d);
        debug_assert!(dot(&obj, &ray).is_positive());
        return LpResult { status: LpStatus::Unbounded, value: None, optimizer: None, ray: Some(ray) };
    }
    let x = to_x(&t.solution(ncols));
    let value = dot(c, &x);
    LpResult { status: LpStatus::Optimal, value: Some(value), optimizer: Some(x), ray: None }
}

/// The set of optimal points, or `None` if the LP has no optimum.
pub fn optimal_face(c: &[Scalar], p: &Polyhedron, sense: Sense) -> Option<(LpResult, Polyhedron)> {
    let r = solve(c, p, sense);
    if r.status != LpStatus::Optimal {
        return None;
    }
    let v = r.value.clone().expect("optimal value");
    let face = p.with_eq(Constraint::new(c.to_vec(), v)).expect("shape").simplify();
    Some((r, face))
}

pub fn feasible_point(p: &Polyhedron) -> Option<Vector> {
    solve(&zeros(p.dim()), p, Sense::Max).optimizer
}

/// Lexicographically smallest point of a bounded-below face: minimizes
/// x_1, then x_2, and so on.
pub fn lex_min(p: &Polyhedron) -> Option<Vector> {
    let n = p.dim();
    let mut face = p.clone();
    let mut last = None;
    for k in 0..n {
        let e = crate::numeric::linalg::unit(n, k);
        let r = solve(&e, &face, Sense::Min);
        if r.status != LpStatus::Optimal {
            return None;
        }
        let v = r.value.clone().expect("value");
        face = face.with_eq(Constraint::new(e, v)).expect("shape");
        last = r.optimizer;
    }
    if n == 0 {
        return feasible_point(p);
    }
    last
}

/// Point of least 1-norm, lexicographically smallest among ties.
pub fn min_norm1(p: &Polyhedron) -> Option<Vector> {
    let m = p.dim();
    let lift = |c: &Constraint| {
        let mut r = c.row.clone();
        r.extend(zeros(m));
        Constraint::new(r, c.rhs.clone())
    };
    let mut ineq: Vec<Constraint> = p.ineqs().iter().map(lift).collect();
    let eq: Vec<Constraint> = p.eqs().iter().map(lift).collect();
    for k in 0..m {
        // x_k - s_k <= 0 and -x_k - s_k <= 0
        let mut a = zeros(2 * m);
        a[k] = Scalar::one();
        a[m + k] = -Scalar::one();
        ineq.push(Constraint::new(a.clone(), Scalar::zero()));
        a[k] = -Scalar::one();
        ineq.push(Constraint::new(a, Scalar::zero()));
    }
    let lifted = Polyhedron::new(2 * m, ineq, eq).expect("shape");
    let mut obj = zeros(2 * m);
    for v in obj.iter_mut().skip(m) {
        *v = Scalar::one();
    }
    let r = solve(&obj, &lifted, Sense::Min);
    let best = r.value?;
    let face = lifted.with_eq(Constraint::new(obj, best)).expect("shape");
    lex_min(&face).map(|point| point[..m].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linalg::from_ints;
    use crate::numeric::{int, rat};

    #[test]
    fn small_max() {
        // max x + y on x + 2y <= 4, 3x + y <= 6, x, y >= 0
        let p = Polyhedron::from_int_ineqs(2, &[&[1, 2, 4], &[3, 1, 6], &[-1, 0, 0], &[0, -1, 0]], &[]);
        let r = solve(&from_ints(&[1, 1]), &p, Sense::Max);
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.value, Some(rat(14, 5)));
        assert_eq!(r.optimizer, Some(vec![rat(8, 5), rat(6, 5)]));
    }

    #[test]
    fn unbounded_ray_improves() {
        let p = Polyhedron::from_int_ineqs(2, &[&[-1, 0, 0]], &[]);
        let r = solve(&from_ints(&[1, 1]), &p, Sense::Max);
        assert_eq!(r.status, LpStatus::Unbounded);
        let d = r.ray.unwrap();
        assert!(dot(&from_ints(&[1, 1]), &d) > int(0));
        assert!(p.contains_direction(&d));
    }

    #[test]
    fn infeasible() {
        let p = Polyhedron::new(
            1,
            vec![Constraint::new(from_ints(&[1]), int(0)), Constraint::new(from_ints(&[-1]), int(-1))],
            vec![],
        )
        .unwrap();
        assert_eq!(solve(&from_ints(&[1]), &p, Sense::Min).status, LpStatus::Infeasible);
    }

    #[test]
    fn face_and_lex_min() {
        // min λ1+λ2+λ3 over {λ >= 0, λ1+λ2-λ3 = 1}: face is a segment.
        let p = Polyhedron::from_int_ineqs(3, &[&[-1, 0, 0, 0], &[0, -1, 0, 0], &[0, 0, -1, 0]], &[&[1, 1, -1, 1]]);
        let (r, face) = optimal_face(&from_ints(&[1, 1, 1]), &p, Sense::Min).unwrap();
        assert_eq!(r.value, Some(int(1)));
        assert_eq!(face.generators().vertices, vec![from_ints(&[1, 0, 0]), from_ints(&[0, 1, 0])]);
        assert_eq!(lex_min(&face), Some(from_ints(&[0, 1, 0])));
    }

    #[test]
    fn equality_only() {
        let p = Polyhedron::from_int_ineqs(2, &[], &[&[1, 1, 2], &[2, 2, 4]]);
        let r = solve(&from_ints(&[1, 1]), &p, Sense::Max);
        assert_eq!(r.value, Some(int(2)));
    }
}
