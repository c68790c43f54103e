//! Difference-quotient estimates built only from an evaluator of the
//! function, used to cross-check the closed forms.

use num_traits::Signed;
use serde_json::{json, Value};

use crate::error::{check_dim, Error, Result};
use crate::numeric::linalg::{self, Vector};
use crate::numeric::scalar::{abs, fmt_scalar, one, pow2_inv, rat};
use crate::numeric::{ExtScalar, Scalar};
use crate::verdict::{Method, Verdict};

#[derive(Clone, Debug)]
pub struct QuotientProbe {
    /// Strictly decreasing positive step sizes.
    pub t_schedule: Vec<Scalar>,
    /// Directions p; the sample at step t also uses w + t p.
    pub perturbations: Vec<Vector>,
    /// Relative tolerance for arc probes on non-PWLQ instances.
    pub tolerance: Scalar,
    /// Degree of the polynomial extrapolation to t = 0 through the last
    /// samples; 0 reports the last sample.
    pub extrapolation: usize,
}

impl Default for QuotientProbe {
    fn default() -> Self {
        QuotientProbe { t_schedule: (3..=10).map(pow2_inv).collect(), perturbations: Vec::new(), tolerance: rat(1, 1000), extrapolation: 2 }
    }
}

impl QuotientProbe {
    pub fn with_schedule(t_schedule: Vec<Scalar>) -> Result<Self> {
        let ok = t_schedule.first().map_or(false, |t| t.is_positive()) && t_schedule.windows(2).all(|p| p[1] < p[0] && p[1].is_positive());
        if !ok {
            return Err(Error::Input("t schedule must be positive and strictly decreasing".into()));
        }
        Ok(QuotientProbe { t_schedule, ..QuotientProbe::default() })
    }

    fn samples(&self, w: &[Scalar], t: &Scalar) -> Vec<Vector> {
        let mut out = vec![w.to_vec()];
        out.extend(self.perturbations.iter().map(|p| linalg::axpy(w, t, p)));
        out
    }
}

/// Quotient values per step together with the resulting liminf estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientEstimate {
    pub samples: Vec<(Scalar, ExtScalar)>,
    pub value: ExtScalar,
}

impl QuotientEstimate {
    fn from_samples(samples: Vec<(Scalar, ExtScalar)>, degree: usize) -> Self {
        let value = estimate(&samples, degree);
        QuotientEstimate { samples, value }
    }

    pub fn at(&self, t: &Scalar) -> Option<&ExtScalar> {
        self.samples.iter().find(|(s, _)| s == t).map(|(_, q)| q)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "value": self.value.to_text(),
            "samples": self.samples.iter().map(|(t, q)| json!([fmt_scalar(t), q.to_text()])).collect::<Vec<_>>(),
        })
    }
}

/// A tail that increases strictly while t·q stays bounded away from zero
/// behaves like c/t and is classified as +∞.
fn diverges(tail: &[(Scalar, Scalar)]) -> bool {
    if tail.len() < 3 {
        return false;
    }
    let three_quarters = rat(3, 4);
    tail.windows(2).all(|p| {
        let s0 = &p[0].0 * &p[0].1;
        let s1 = &p[1].0 * &p[1].1;
        p[1].1 > p[0].1 && s0.is_positive() && s1 >= &s0 * &three_quarters
    })
}

/// Neville's scheme evaluated at 0.
fn extrapolate(points: &[(Scalar, Scalar)]) -> Scalar {
    let mut p: Vec<Scalar> = points.iter().map(|(_, q)| q.clone()).collect();
    let ts: Vec<&Scalar> = points.iter().map(|(t, _)| t).collect();
    let k = p.len();
    for level in 1..k {
        for i in 0..k - level {
            let (ti, tj) = (ts[i], ts[i + level]);
            p[i] = (tj * &p[i] - ti * &p[i + 1]) / (tj - ti);
        }
    }
    p[0].clone()
}

fn estimate(samples: &[(Scalar, ExtScalar)], degree: usize) -> ExtScalar {
    let Some((_, last)) = samples.last() else { return ExtScalar::PosInf };
    if !last.is_finite() {
        return ExtScalar::PosInf;
    }
    let tail: Vec<(Scalar, Scalar)> = samples
        .iter()
        .rev()
        .take_while(|(_, q)| q.is_finite())
        .map(|(t, q)| (t.clone(), q.finite().expect("finite").clone()))
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    if diverges(&tail[tail.len().saturating_sub(3)..]) {
        return ExtScalar::PosInf;
    }
    let last3 = &tail[tail.len().saturating_sub(3)..];
    if last3.len() == 3 && last3.iter().all(|(_, q)| *q == last3[0].1) {
        return ExtScalar::Finite(last3[0].1.clone());
    }
    let k = (degree + 1).min(tail.len());
    ExtScalar::Finite(extrapolate(&tail[tail.len() - k..]))
}

fn base_value<F>(phi: &F, x: &[Scalar]) -> Result<Scalar>
where
    F: Fn(&[Scalar]) -> Result<ExtScalar>,
{
    phi(x)?.finite().cloned().ok_or_else(|| Error::NotInDomain("base point has infinite value".into()))
}

fn quotient_min<F, Q>(phi: &F, x: &[Scalar], w: &[Scalar], probe: &QuotientProbe, q: Q) -> Result<QuotientEstimate>
where
    F: Fn(&[Scalar]) -> Result<ExtScalar>,
    Q: Fn(&Scalar, &Scalar, &[Scalar]) -> Scalar,
{
    check_dim(x.len(), w.len())?;
    let mut samples = Vec::with_capacity(probe.t_schedule.len());
    for t in &probe.t_schedule {
        let mut best = ExtScalar::PosInf;
        for u in probe.samples(w, t) {
            let point = linalg::axpy(x, t, &u);
            if let ExtScalar::Finite(val) = phi(&point)? {
                best = best.min(ExtScalar::Finite(q(t, &val, &u)));
            }
        }
        samples.push((t.clone(), best));
    }
    Ok(QuotientEstimate::from_samples(samples, probe.extrapolation))
}

/// [φ(x + t w) - φ(x)] / t
pub fn dq_subderivative<F>(phi: F, x: &[Scalar], w: &[Scalar], probe: &QuotientProbe) -> Result<QuotientEstimate>
where
    F: Fn(&[Scalar]) -> Result<ExtScalar>,
{
    let base = base_value(&phi, x)?;
    quotient_min(&phi, x, w, probe, |t, val, _| (val - &base) / t)
}

/// [φ(x + t w) - φ(x) - t⟨v, w⟩] / ½t²
pub fn dq_second_subderivative<F>(phi: F, x: &[Scalar], v: &[Scalar], w: &[Scalar], probe: &QuotientProbe) -> Result<QuotientEstimate>
where
    F: Fn(&[Scalar]) -> Result<ExtScalar>,
{
    check_dim(x.len(), v.len())?;
    let base = base_value(&phi, x)?;
    quotient_min(&phi, x, w, probe, |t, val, u| {
        let half_sq = t * t / Scalar::from_integer(2.into());
        (val - &base - t * linalg::dot(v, u)) / half_sq
    })
}

/// [φ(x + t w + ½t² z) - φ(x) - t dφ(x)(w)] / ½t²
pub fn dq_parabolic<F>(phi: F, x: &[Scalar], w: &[Scalar], dphi: &Scalar, z: &[Scalar], probe: &QuotientProbe) -> Result<QuotientEstimate>
where
    F: Fn(&[Scalar]) -> Result<ExtScalar>,
{
    check_dim(x.len(), w.len())?;
    check_dim(x.len(), z.len())?;
    let base = base_value(&phi, x)?;
    let half = rat(1, 2);
    let mut samples = Vec::new();
    for t in &probe.t_schedule {
        let half_sq = t * t * &half;
        let mut best = ExtScalar::PosInf;
        for u in probe.samples(z, t) {
            let point = linalg::axpy(&linalg::axpy(x, t, w), &half_sq, &u);
            if let ExtScalar::Finite(val) = phi(&point)? {
                best = best.min(ExtScalar::Finite((val - &base - t * dphi) / &half_sq));
            }
        }
        samples.push((t.clone(), best));
    }
    Ok(QuotientEstimate::from_samples(samples, probe.extrapolation))
}

/// Δ²_t along the points ξ(t) of an arc through x with ξ(t) = x + t w_t.
/// The arc returns None when it cannot produce a feasible point at t.
pub fn arc_quotients<F, A>(phi: F, x: &[Scalar], v: &[Scalar], arc: A, ts: &[Scalar]) -> Result<Vec<(Scalar, Option<ExtScalar>)>>
where
    F: Fn(&[Scalar]) -> Result<ExtScalar>,
    A: Fn(&Scalar) -> Result<Option<Vector>>,
{
    let base = base_value(&phi, x)?;
    let half = rat(1, 2);
    let mut out = Vec::new();
    for t in ts {
        let q = match arc(t)? {
            None => None,
            Some(p) => {
                check_dim(x.len(), p.len())?;
                Some(match phi(&p)? {
                    ExtScalar::Finite(val) => {
                        ExtScalar::Finite((val - &base - linalg::dot(v, &linalg::sub(&p, x))) / (t * t * &half))
                    }
                    other => other,
                })
            }
        };
        out.push((t.clone(), q));
    }
    Ok(out)
}

/// Checks the quotient along the arc against `target` at the two smallest
/// steps of the schedule.
pub fn epi_probe<F, A>(phi: F, x: &[Scalar], v: &[Scalar], arc: A, target: &ExtScalar, probe: &QuotientProbe) -> Result<Verdict>
where
    F: Fn(&[Scalar]) -> Result<ExtScalar>,
    A: Fn(&Scalar) -> Result<Option<Vector>>,
{
    let Some(target) = target.finite() else {
        return Ok(Verdict::unknown(Method::Probe, "target value is not finite"));
    };
    let ts: Vec<Scalar> = probe.t_schedule.iter().rev().take(2).rev().cloned().collect();
    let quotients = arc_quotients(phi, x, v, arc, &ts)?;
    let allowed = &probe.tolerance * abs(target).max(one());
    let mut rows = Vec::new();
    let mut holds = true;
    for (t, q) in &quotients {
        let Some(q) = q else {
            return Ok(Verdict::unknown(Method::Probe, format!("arc has no feasible point at t = {}", fmt_scalar(t))));
        };
        let err = match q.finite() {
            Some(q) => ExtScalar::Finite(abs(&(q - target))),
            None => ExtScalar::PosInf,
        };
        holds &= err <= ExtScalar::Finite(allowed.clone());
        rows.push(json!({ "t": fmt_scalar(t), "quotient": q.to_text(), "error": err.to_text() }));
    }
    let cert = json!({ "target": fmt_scalar(target), "allowed": fmt_scalar(&allowed), "samples": rows });
    Ok(if holds {
        Verdict::holds(Method::Probe).with_certificate(cert)
    } else {
        Verdict::new(crate::verdict::Outcome::Fails, Method::Probe).with_certificate(cert).with_detail("quotient differs from the closed form")
    })
}
