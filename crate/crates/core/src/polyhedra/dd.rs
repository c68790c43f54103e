//! Double description for cones {y : G y <= 0, E y = 0}.

use num_traits::{Signed, Zero};

use crate::numeric::linalg::{dot, primitive, Matrix, Vector};
use crate::numeric::Scalar;

/// Extreme rays of the pointed part and a basis of the lineality space.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConeGenerators {
    pub rays: Vec<Vector>,
    pub lineality: Vec<Vector>,
}

pub fn cone_generators(dim: usize, ineq: &[Vector], eq: &[Vector]) -> ConeGenerators {
    let all: Vec<Vector> = ineq.iter().chain(eq).cloned().collect();
    let lineality = if all.is_empty() {
        crate::numeric::linalg::span_basis(dim, &identity_rows(dim))
    } else {
        Matrix::from_rows(dim, &all).expect("row length").nullspace()
    };

    // Parametrize S = {y : E y = 0, y ⊥ lineality} as y = B u.
    let mut sub_rows: Vec<Vector> = eq.to_vec();
    sub_rows.extend(lineality.iter().cloned());
    let basis = if sub_rows.is_empty() {
        identity_rows(dim)
    } else {
        Matrix::from_rows(dim, &sub_rows).expect("row length").nullspace()
    };
    let k = basis.len();
    if k == 0 {
        return ConeGenerators { rays: Vec::new(), lineality };
    }
    let b = Matrix::from_cols(dim, &basis).expect("basis shape");
    let reduced: Vec<Vector> = ineq.iter().map(|g| b.tmul_vec(g).expect("shape")).collect();
    let mut rays: Vec<Vector> = pointed_rays(k, &reduced)
        .into_iter()
        .map(|u| primitive(&b.mul_vec(&u).expect("shape")))
        .collect();
    rays.sort_by(|a, b| b.cmp(a));
    rays.dedup();
    ConeGenerators { rays, lineality }
}

fn identity_rows(dim: usize) -> Vec<Vector> {
    (0..dim).map(|i| crate::numeric::linalg::unit(dim, i)).collect()
}

struct Ray {
    v: Vector,
    zeros: Vec<bool>,
}

/// Extreme rays of the pointed cone {u in R^k : M u <= 0}, where M has rank k.
fn pointed_rays(k: usize, rows: &[Vector]) -> Vec<Vector> {
    // Greedy choice of k independent rows for the initial simplicial cone.
    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_rows: Vec<Vector> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if chosen.len() == k {
            break;
        }
        let mut trial = chosen_rows.clone();
        trial.push(r.clone());
        if crate::numeric::linalg::rank_of(k, &trial) == trial.len() {
            chosen.push(i);
            chosen_rows = trial;
        }
    }
    assert_eq!(chosen.len(), k, "inequality system is not of full rank after removing lineality");

    let m_init = Matrix::from_rows(k, &chosen_rows).expect("shape");
    let mut processed: Vec<usize> = chosen.clone();
    let mut rays: Vec<Ray> = Vec::new();
    for j in 0..k {
        let mut rhs = vec![Scalar::zero(); k];
        rhs[j] = -Scalar::from_integer(1.into());
        let u = m_init.solve(&rhs).expect("shape").expect("initial system is invertible");
        let zeros = (0..k).map(|i| i != j).collect();
        rays.push(Ray { v: primitive(&u), zeros });
    }

    for (idx, row) in rows.iter().enumerate() {
        if chosen.contains(&idx) {
            continue;
        }
        let vals: Vec<Scalar> = rays.iter().map(|r| dot(row, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut next: Vec<Ray> = Vec::new();
        for p in &pos {
            for n in &neg {
                if !adjacent(&rays, *p, *n, k) {
                    continue;
                }
                let v = crate::numeric::linalg::sub(
                    &crate::numeric::linalg::scale(&vals[*p], &rays[*n].v),
                    &crate::numeric::linalg::scale(&vals[*n], &rays[*p].v),
                );
                let mut zeros: Vec<bool> = rays[*p].zeros.iter().zip(&rays[*n].zeros).map(|(a, b)| *a && *b).collect();
                zeros.push(true);
                next.push(Ray { v: primitive(&v), zeros });
            }
        }
        let mut kept: Vec<Ray> = Vec::new();
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i].is_positive() {
                continue;
            }
            r.zeros.push(vals[i].is_zero());
            kept.push(r);
        }
        kept.extend(next);
        rays = kept;
        processed.push(idx);
    }
    rays.into_iter().map(|r| r.v).collect()
}

/// Combinatorial adjacency: no third ray is tight on every constraint that
/// both `p` and `n` are tight on, and that common set has rank k-2 at least.
fn adjacent(rays: &[Ray], p: usize, n: usize, k: usize) -> bool {
    let common: Vec<bool> = rays[p].zeros.iter().zip(&rays[n].zeros).map(|(a, b)| *a && *b).collect();
    let count = common.iter().filter(|c| **c).count();
    if count + 2 < k {
        return false;
    }
    !rays.iter().enumerate().any(|(t, r)| {
        t != p && t != n && common.iter().zip(&r.zeros).all(|(c, z)| !*c || *z)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linalg::from_ints;

    #[test]
    fn orthant() {
        let g = cone_generators(2, &[from_ints(&[-1, 0]), from_ints(&[0, -1])], &[]);
        assert_eq!(g.rays, vec![from_ints(&[1, 0]), from_ints(&[0, 1])]);
        assert!(g.lineality.is_empty());
    }

    #[test]
    fn halfspace_has_lineality() {
        let g = cone_generators(2, &[from_ints(&[1, 0])], &[]);
        assert_eq!(g.rays, vec![from_ints(&[-1, 0])]);
        assert_eq!(g.lineality, vec![from_ints(&[0, 1])]);
    }

    #[test]
    fn square_pyramid_cone() {
        // {y : |y1| <= y3, |y2| <= y3} has four extreme rays.
        let rows = vec![
            from_ints(&[1, 0, -1]),
            from_ints(&[-1, 0, -1]),
            from_ints(&[0, 1, -1]),
            from_ints(&[0, -1, -1]),
        ];
        let g = cone_generators(3, &rows, &[]);
        assert_eq!(g.rays.len(), 4);
        for r in &g.rays {
            assert!(rows.iter().all(|a| dot(a, r) <= Scalar::zero()));
        }
    }

    #[test]
    fn equality_restricted() {
        // {λ >= 0 : λ1 + λ2 - λ3 = 0}
        let g = cone_generators(
            3,
            &[from_ints(&[-1, 0, 0]), from_ints(&[0, -1, 0]), from_ints(&[0, 0, -1])],
            &[from_ints(&[1, 1, -1])],
        );
        assert_eq!(g.rays, vec![from_ints(&[1, 0, 1]), from_ints(&[0, 1, 1])]);
    }

    #[test]
    fn trivial_cone() {
        let g = cone_generators(1, &[from_ints(&[1]), from_ints(&[-1])], &[]);
        assert!(g.rays.is_empty() && g.lineality.is_empty());
    }
}
