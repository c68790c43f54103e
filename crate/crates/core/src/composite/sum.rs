use super::{Assumptions, Composite, MsqcAssumption, SmoothMap};
use crate::error::{Error, Result};
use crate::numeric::linalg::SymMatrix;
use crate::numeric::Scalar;
use crate::pwlq::{Piece, PwlqFunction};
use crate::verdict::{Method, Verdict};

fn block_diag(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    let (n1, n2) = (a.dim(), b.dim());
    let mut s = SymMatrix::zeros(n1 + n2);
    for i in 0..n1 {
        for j in i..n1 {
            s.set(i, j, a.get(i, j).clone());
        }
    }
    for i in 0..n2 {
        for j in i..n2 {
            s.set(n1 + i, n1 + j, b.get(i, j).clone());
        }
    }
    s
}

/// ϑ_1(y_1) + ϑ_2(y_2) as one function on the product space.
pub fn separable_sum(a: &PwlqFunction, b: &PwlqFunction) -> Result<PwlqFunction> {
    let mut pieces = Vec::new();
    for p in a.pieces() {
        for q in b.pieces() {
            let mut lin = p.lin.clone();
            lin.extend(q.lin.iter().cloned());
            pieces.push(Piece::new(
                p.omega.product(&q.omega),
                block_diag(&p.quad, &q.quad),
                lin,
                &p.constant + &q.constant,
            ));
        }
    }
    PwlqFunction::new_unchecked(a.dim() + b.dim(), pieces)
}

/// Writes φ_1 + ... + φ_s as one composite with stacked inner map and
/// separable outer function, and decides the qualification that makes the
/// sum rules valid.
pub fn sum_compose(parts: &[Composite]) -> Result<(Composite, Verdict)> {
    let first = parts.first().ok_or_else(|| Error::Input("empty sum".into()))?;
    let mut theta = first.theta.clone();
    for p in &parts[1..] {
        theta = separable_sum(&theta, &p.theta)?;
    }
    let f = SmoothMap::stack(&parts.iter().map(|p| &p.f).collect::<Vec<_>>())?;
    let verdict = if parts.iter().all(|p| p.f.is_affine()) {
        Verdict::holds(Method::AutoHoffman).with_detail("every inner map is affine")
    } else if parts.iter().all(|p| p.assumptions.msqc == MsqcAssumption::UserAsserted) {
        Verdict::holds(Method::UserAsserted).with_detail("every summand carries an asserted qualification")
    } else {
        Verdict::unknown(Method::UserAsserted, "a summand has a nonlinear inner map and no asserted qualification")
    };
    let msqc = match verdict.method {
        Method::AutoHoffman => MsqcAssumption::Auto,
        _ if verdict.is_holds() => MsqcAssumption::UserAsserted,
        _ => MsqcAssumption::Unknown,
    };
    let scalar_max = |get: fn(&Assumptions) -> &Option<Scalar>| -> Option<Scalar> {
        parts.iter().map(|p| get(&p.assumptions).clone()).collect::<Option<Vec<_>>>().and_then(|v| v.into_iter().max())
    };
    let assumptions = Assumptions { kappa: scalar_max(|a| &a.kappa), ell: scalar_max(|a| &a.ell), msqc };
    Ok((Composite::new(theta, f, assumptions)?, verdict))
}
