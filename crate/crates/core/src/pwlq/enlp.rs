//! Separable conjugates θ(y) = Σ_k sup_{z in [l_k, u_k]} y_k z - ½ b_k z².

use num_traits::{Signed, Zero};

use super::function::{Piece, PwlqFunction};
use crate::error::{Error, Result};
use crate::numeric::linalg::{self, SymMatrix};
use crate::numeric::{ExtScalar, Scalar};
use crate::polyhedra::{Constraint, Polyhedron};

/// A one-dimensional piece on lo <= y <= hi: ½ q y² + c y + k.
#[derive(Clone, Debug)]
struct Interval {
    lo: Option<Scalar>,
    hi: Option<Scalar>,
    q: Scalar,
    c: Scalar,
    k: Scalar,
}

fn coordinate_pieces(b: &Scalar, l: &ExtScalar, u: &ExtScalar) -> Result<Vec<Interval>> {
    if b.is_negative() {
        return Err(Error::Input("separable curvature must be nonnegative".into()));
    }
    if l > u || *l == ExtScalar::PosInf || *u == ExtScalar::NegInf {
        return Err(Error::Input("empty interval in separable conjugate".into()));
    }
    let half = Scalar::new(1.into(), 2.into());
    let zero = Scalar::zero();
    let (lf, uf) = (l.finite().cloned(), u.finite().cloned());
    let mut out = Vec::new();
    if b.is_zero() {
        match (&lf, &uf) {
            (None, None) => out.push(Interval { lo: Some(zero.clone()), hi: Some(zero.clone()), q: zero.clone(), c: zero.clone(), k: zero }),
            _ => {
                if let Some(l) = &lf {
                    out.push(Interval { lo: None, hi: Some(zero.clone()), q: zero.clone(), c: l.clone(), k: zero.clone() });
                }
                if let Some(u) = &uf {
                    out.push(Interval { lo: Some(zero.clone()), hi: None, q: zero.clone(), c: u.clone(), k: zero.clone() });
                }
            }
        }
        return Ok(out);
    }
    if let Some(l) = &lf {
        out.push(Interval { lo: None, hi: Some(b * l), q: zero.clone(), c: l.clone(), k: -(&half * b * l * l) });
    }
    out.push(Interval {
        lo: lf.as_ref().map(|l| b * l),
        hi: uf.as_ref().map(|u| b * u),
        q: Scalar::from_integer(1.into()) / b,
        c: zero.clone(),
        k: zero.clone(),
    });
    if let Some(u) = &uf {
        out.push(Interval { lo: Some(b * u), hi: None, q: zero, c: u.clone(), k: -(&half * b * u * u) });
    }
    Ok(out)
}

impl PwlqFunction {
    /// Piecewise form of the separable conjugate with curvatures `b` and
    /// box `bounds` (entries may be infinite).
    pub fn enlp_separable(b: &[Scalar], bounds: &[(ExtScalar, ExtScalar)]) -> Result<PwlqFunction> {
        let m = b.len();
        crate::error::check_dim(m, bounds.len())?;
        let per: Vec<Vec<Interval>> =
            b.iter().zip(bounds).map(|(bk, (l, u))| coordinate_pieces(bk, l, u)).collect::<Result<_>>()?;
        let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
        for p in &per {
            combos = combos.into_iter().flat_map(|c| (0..p.len()).map(move |i| [c.clone(), vec![i]].concat())).collect();
        }
        let mut pieces = Vec::new();
        for combo in combos {
            let mut ineq = Vec::new();
            let mut diag = Vec::new();
            let mut lin = Vec::new();
            let mut constant = Scalar::zero();
            for (k, &i) in combo.iter().enumerate() {
                let iv = &per[k][i];
                if let Some(lo) = &iv.lo {
                    ineq.push(Constraint::new(linalg::neg(&linalg::unit(m, k)), -lo.clone()));
                }
                if let Some(hi) = &iv.hi {
                    ineq.push(Constraint::new(linalg::unit(m, k), hi.clone()));
                }
                diag.push(iv.q.clone());
                lin.push(iv.c.clone());
                constant += &iv.k;
            }
            pieces.push(Piece::new(Polyhedron::new(m, ineq, Vec::new())?, SymMatrix::diag(&diag), lin, constant));
        }
        PwlqFunction::new_unchecked(m, pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linalg::from_ints;
    use crate::numeric::{int, rat};

    fn inf() -> (ExtScalar, ExtScalar) {
        (ExtScalar::NegInf, ExtScalar::PosInf)
    }

    #[test]
    fn half_square_plus_zero_indicator() {
        let f = PwlqFunction::enlp_separable(&[int(1), int(0)], &[inf(), inf()]).unwrap();
        assert_eq!(f.pieces().len(), 1);
        assert_eq!(f.eval(&from_ints(&[3, 0])).unwrap(), ExtScalar::Finite(rat(9, 2)));
        assert_eq!(f.eval(&from_ints(&[3, 1])).unwrap(), ExtScalar::PosInf);
    }

    #[test]
    fn box_conjugate_is_huber_like() {
        let f = PwlqFunction::enlp_separable(&[int(1)], &[(ExtScalar::Finite(int(0)), ExtScalar::Finite(int(1)))]).unwrap();
        assert_eq!(f.eval(&[int(-2)]).unwrap(), ExtScalar::Finite(int(0)));
        assert_eq!(f.eval(&[rat(1, 2)]).unwrap(), ExtScalar::Finite(rat(1, 8)));
        assert_eq!(f.eval(&[int(3)]).unwrap(), ExtScalar::Finite(rat(5, 2)));
        // Consistent pieces under the full check too.
        PwlqFunction::new(1, f.pieces().to_vec()).unwrap();
    }

    #[test]
    fn nonneg_box_with_zero_curvature_is_orthant_indicator() {
        let b = (ExtScalar::Finite(int(0)), ExtScalar::PosInf);
        let f = PwlqFunction::enlp_separable(&[int(0), int(0)], &[b.clone(), b]).unwrap();
        assert_eq!(f.eval(&from_ints(&[-1, -5])).unwrap(), ExtScalar::Finite(int(0)));
        assert_eq!(f.eval(&from_ints(&[1, -5])).unwrap(), ExtScalar::PosInf);
    }

    #[test]
    fn mixed_bounds_product_pieces() {
        let f = PwlqFunction::enlp_separable(
            &[int(2), int(0)],
            &[(ExtScalar::Finite(int(-1)), ExtScalar::Finite(int(1))), (ExtScalar::Finite(int(-1)), ExtScalar::Finite(int(2)))],
        )
        .unwrap();
        assert_eq!(f.pieces().len(), 6);
        PwlqFunction::new(2, f.pieces().to_vec()).unwrap();
        // sup_{z in [-1,1]} 5z - z² = 4 at z = 1; sup_{z in [-1,2]} -3z = 3.
        assert_eq!(f.eval(&from_ints(&[5, -3])).unwrap(), ExtScalar::Finite(int(7)));
    }
}
