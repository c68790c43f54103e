//! JSON reports for the command-line front end.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::composite::{MultiplierAnalysis, Site};
use crate::copositivity;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::kkt::{KktPoint, KktSite};
use crate::numeric::linalg::Vector;
use crate::numeric::scalar::{abs, fmt_scalar, one};
use crate::numeric::{Polynomial, Scalar};
use crate::optimality::ProblemSite;
use crate::oracle::{self, QuotientProbe};
use crate::polyhedra::json::{text_vector, to_json};
use crate::polyhedra::Polyhedron;
use crate::problem::{Point, Problem};
use crate::verdict::{Method, Verdict};
use crate::verify;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    FirstOrder,
    D2,
    Proto,
    Optimality,
    Kkt,
    Verify,
}

impl Command {
    pub const ALL: [Command; 7] =
        [Command::Check, Command::FirstOrder, Command::D2, Command::Proto, Command::Optimality, Command::Kkt, Command::Verify];

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::FirstOrder => "first-order",
            Command::D2 => "d2",
            Command::Proto => "proto",
            Command::Optimality => "optimality",
            Command::Kkt => "kkt",
            Command::Verify => "verify",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Input(format!("unknown command {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub execution: Execution,
    pub copositivity: copositivity::Options,
    pub probe: QuotientProbe,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { execution: exec::default_mode(), copositivity: copositivity::Options::from_env(), probe: QuotientProbe::default() }
    }
}

fn polyhedron_section(p: &Polyhedron) -> Value {
    let p = p.simplify();
    let g = p.generators();
    json!({
        "set": to_json(&p),
        "vertices": g.vertices.iter().map(|v| text_vector(v)).collect::<Vec<_>>(),
        "rays": g.rays.iter().map(|v| text_vector(v)).collect::<Vec<_>>(),
        "lineality": g.lineality.iter().map(|v| text_vector(v)).collect::<Vec<_>>(),
    })
}

/// Runs `f`, turning a licensing refusal into a structured section.
fn licensed(f: impl FnOnce() -> Result<Value>) -> Result<Value> {
    match f() {
        Err(Error::MsqcUnlicensed(msg)) => Ok(json!({ "refused": { "kind": "msqc_unlicensed", "message": msg } })),
        other => other,
    }
}

fn per_direction<F>(opts: &ReportOptions, ws: &[Vector], f: F) -> Result<Vec<Value>>
where
    F: Fn(&Vector) -> Result<Value> + Sync + Send,
{
    exec::map(opts.execution, ws, |w| {
        let mut section = f(w)?;
        section.as_object_mut().expect("object").insert("w".into(), json!(text_vector(w)));
        Ok(section)
    })
    .into_iter()
    .collect()
}

fn require_target(problem: &Problem, point: &Point) -> Result<Vector> {
    problem
        .target(point)?
        .ok_or_else(|| Error::Input(format!("point {:?} has no v and the problem has no objective", point.name)))
}

/// Builds the report for `command` at the named point; `extra_ws` are
/// appended to the point's own directions.
pub fn run(command: Command, problem: &Problem, point: Option<&str>, extra_ws: &[Vector], opts: &ReportOptions) -> Result<Value> {
    let pt = problem.point(point)?;
    let mut ws = pt.ws.clone();
    for w in extra_ws {
        if w.len() != problem.problem.composite.n() {
            return Err(Error::DimensionMismatch { expected: problem.problem.composite.n(), found: w.len() });
        }
        ws.push(w.clone());
    }
    let mut out = Map::new();
    out.insert("command".into(), json!(command.name()));
    out.insert("problem".into(), json!(problem.name));
    out.insert("point".into(), json!(pt.name));
    out.insert("x".into(), json!(text_vector(&pt.x)));
    let body = match command {
        Command::Check => check(problem, pt, opts)?,
        Command::FirstOrder => licensed(|| first_order(problem, pt, &ws, opts))?,
        Command::D2 => licensed(|| d2(problem, pt, &ws, opts))?,
        Command::Proto => licensed(|| proto(problem, pt, &ws, opts))?,
        Command::Optimality => licensed(|| optimality(problem, pt, opts))?,
        Command::Kkt => licensed(|| kkt(problem, pt, &ws, opts))?,
        Command::Verify => licensed(|| verify(problem, pt, &ws, opts))?,
    };
    if let Value::Object(m) = body {
        out.extend(m);
    }
    let notes: Vec<&str> = problem
        .discrepancies
        .iter()
        .filter(|d| d.point.as_deref().map_or(true, |p| p == pt.name))
        .filter(|d| d.command.as_deref().map_or(true, |c| c == command.name()))
        .map(|d| d.note.as_str())
        .collect();
    if !notes.is_empty() {
        out.insert("discrepancies".into(), json!(notes));
    }
    Ok(Value::Object(out))
}

fn site<'a>(problem: &'a Problem, pt: &Point, opts: &ReportOptions) -> Result<Site<'a>> {
    Site::new(&problem.problem.composite, &pt.x, opts.copositivity.clone())
}

fn check(problem: &Problem, pt: &Point, opts: &ReportOptions) -> Result<Value> {
    let s = site(problem, pt, opts)?;
    Ok(json!({
        "y": text_vector(&s.y),
        "metric_regularity": s.check_metric_regularity()?.to_json(),
        "msqc": s.msqc.to_json(),
    }))
}

fn first_order(problem: &Problem, pt: &Point, ws: &[Vector], opts: &ReportOptions) -> Result<Value> {
    let s = site(problem, pt, opts)?;
    s.require_license()?;
    let mut out = json!({
        "theta_subdifferential": polyhedron_section(s.theta_subdifferential()?),
        "subdifferential": polyhedron_section(&s.subdifferential()?),
    });
    if let Some(v) = problem.target(pt)? {
        let lam = s.multiplier_set(&v)?;
        out["v"] = json!(text_vector(&v));
        out["multiplier_set"] = polyhedron_section(&lam);
        if !lam.is_empty() {
            let b = s.select_bounded_multiplier(&v)?;
            out["bounded_multiplier"] = json!({
                "lambda": text_vector(&b.lambda),
                "norm1": fmt_scalar(&b.norm1),
                "bound": b.bound.as_ref().map(fmt_scalar),
                "within_bound": b.within_bound(),
            });
        }
    }
    if !ws.is_empty() {
        out["directions"] = json!(per_direction(opts, ws, |w| Ok(json!({ "subderivative": s.subderivative(w)?.to_text() })))?);
    }
    Ok(out)
}

fn analysis_header(ma: &MultiplierAnalysis) -> Value {
    json!({
        "v": text_vector(&ma.v),
        "multipliers": polyhedron_section(&ma.multipliers),
        "selected_multiplier": text_vector(ma.lambda()),
        "critical_cone": polyhedron_section(&ma.critical),
        "critical_pieces": ma.critical_pieces.iter().map(|(i, k)| json!({ "piece": i, "cone": to_json(k) })).collect::<Vec<_>>(),
    })
}

fn d2(problem: &Problem, pt: &Point, ws: &[Vector], opts: &ReportOptions) -> Result<Value> {
    let s = site(problem, pt, opts)?;
    let v = require_target(problem, pt)?;
    let ma = MultiplierAnalysis::new(&s, &v)?;
    let mut out = analysis_header(&ma);
    if !ws.is_empty() {
        out["directions"] = json!(per_direction(opts, ws, |w| {
            let mut sec = json!({ "critical": ma.is_critical(w)?, "d2": ma.d2(w)?.to_text() });
            if ma.is_critical(w)? {
                let lp = ma.multiplier_lp(w)?;
                let dual = ma.parabolic_dual(w)?;
                sec["theta_term"] = json!(ma.theta_term(w)?.to_text());
                sec["multiplier_lp"] = json!({ "value": fmt_scalar(&lp.value), "optimizer": text_vector(&lp.optimizer) });
                sec["parabolic_dual"] = json!({ "value": fmt_scalar(&dual.value), "z": text_vector(&dual.z), "piece": dual.piece });
            }
            Ok(sec)
        })?);
    }
    Ok(out)
}

fn proto(problem: &Problem, pt: &Point, ws: &[Vector], opts: &ReportOptions) -> Result<Value> {
    let s = site(problem, pt, opts)?;
    let v = require_target(problem, pt)?;
    let ma = MultiplierAnalysis::new(&s, &v)?;
    let mut out = json!({ "v": text_vector(&v), "selected_multiplier": text_vector(ma.lambda()) });
    if !ws.is_empty() {
        out["directions"] = json!(per_direction(opts, ws, |w| Ok(json!({ "proto_derivative": polyhedron_section(&ma.proto_derivative(w)?) })))?);
    }
    Ok(out)
}

fn optimality(problem: &Problem, pt: &Point, opts: &ReportOptions) -> Result<Value> {
    let ps = ProblemSite::new(&problem.problem, &pt.x, opts.copositivity.clone())?;
    let st = ps.stationarity()?;
    let mut out = json!({ "objective": problem.problem.objective.to_string(), "stationarity": st.to_json() });
    if st.is_holds() {
        out["necessary_soc"] = ps.necessary_soc()?.to_json();
        out["sufficient_soc"] = ps.sufficient_soc()?.to_json();
    } else {
        let skipped = json!({ "skipped": "stationarity does not hold" });
        out["necessary_soc"] = skipped.clone();
        out["sufficient_soc"] = skipped;
    }
    Ok(out)
}

fn kkt_point(pt: &Point) -> Result<KktPoint> {
    let lambda = pt.lambda.clone().ok_or_else(|| Error::Input(format!("point {:?} has no lambda", pt.name)))?;
    Ok(KktPoint { x: pt.x.clone(), lambda })
}

/// ∇φ₀(x) + Σ λ_k ∇f_k(x) with λ fixed, as polynomial text.
fn lagrangian_gradient(problem: &Problem, lambda: &[Scalar]) -> Vec<String> {
    let c = &problem.problem.composite;
    (0..c.n())
        .map(|i| {
            let mut p: Polynomial = problem.problem.objective.derivative(i);
            for (k, f) in c.f.components().iter().enumerate() {
                p = p.add(&f.derivative(i).scale(&lambda[k]));
            }
            p.to_string()
        })
        .collect()
}

fn kkt(problem: &Problem, pt: &Point, ws: &[Vector], opts: &ReportOptions) -> Result<Value> {
    let point = kkt_point(pt)?;
    let ks = KktSite::new(&problem.problem, point, opts.copositivity.clone())?;
    let mut dirs = ks.probe_directions()?;
    for w in ws {
        if !dirs.contains(w) {
            dirs.push(w.clone());
        }
    }
    Ok(json!({
        "lambda": text_vector(&ks.point.lambda),
        "kkt_mapping": {
            "grad_x_lagrangian": lagrangian_gradient(problem, &ks.point.lambda),
            "inclusion": "lambda in the subdifferential of theta at f(x)",
        },
        "uniqueness": ks.uniqueness_check()?.to_json(),
        "strong_robinson": ks.strong_robinson()?.to_json(),
        "kkt_ssr": ks.kkt_ssr()?.to_json(),
        "isos1_probe": ks.isos1_probe(&dirs)?.to_json(),
    }))
}

fn subderivative_oracle(s: &Site, w: &[Scalar], probe: &QuotientProbe) -> Result<Verdict> {
    let closed = s.subderivative(w)?;
    let composite = s.composite;
    let est = oracle::dq_subderivative(|x| composite.eval(x), &s.x, w, probe)?;
    let ok = match (closed.finite(), est.value.finite()) {
        (Some(c), Some(e)) if composite.f.is_affine() => c == e,
        (Some(c), Some(e)) => abs(&(c - e)) <= &probe.tolerance * abs(c).max(one()),
        (None, None) => true,
        _ => false,
    };
    let cert = json!({ "closed_form": closed.to_text(), "oracle": est.to_json() });
    Ok(if ok { Verdict::holds(Method::Probe) } else { Verdict::new(crate::verdict::Outcome::Fails, Method::Probe) }.with_certificate(cert))
}

fn verify(problem: &Problem, pt: &Point, ws: &[Vector], opts: &ReportOptions) -> Result<Value> {
    let s = site(problem, pt, opts)?;
    s.require_license()?;
    let mut out = json!({ "msqc": s.msqc.to_json() });
    let target = problem.target(pt)?;
    let ma = match &target {
        Some(v) if !s.multiplier_set(v)?.is_empty() => Some(MultiplierAnalysis::new(&s, v)?),
        _ => None,
    };
    if let Some(ma) = &ma {
        out["v"] = json!(text_vector(&ma.v));
    }
    if !ws.is_empty() {
        out["directions"] = json!(per_direction(opts, ws, |w| {
            let mut sec = json!({ "subderivative": subderivative_oracle(&s, w, &opts.probe)?.to_json() });
            if let Some(ma) = &ma {
                sec["d2"] = verify::d2_oracle(ma, w, &opts.probe)?.to_json();
                sec["proto_relation"] = verify::composite_proto_relation(ma, w)?.to_json();
                if ma.is_critical(w)? {
                    sec["primal_dual"] = verify::primal_dual(ma, w)?.to_json();
                }
                let d = s.jac.mul_vec(w)?;
                sec["theta_proto_relation"] = verify::pwlq_proto_relation(&s.composite.theta, &s.y, ma.lambda(), &d)?.to_json();
            }
            Ok(sec)
        })?);
    }
    if problem.has_objective {
        let ps = ProblemSite::new(&problem.problem, &pt.x, opts.copositivity.clone())?;
        if ps.stationarity()?.is_holds() {
            let suff = ps.sufficient_soc()?;
            if let Some(ell) = &suff.growth {
                out["growth"] = verify::growth_oracle(&problem.problem, &pt.x, ell)?.to_json();
            }
        }
    }
    if let Some(lambda) = &pt.lambda {
        let ks = KktSite::new(&problem.problem, KktPoint { x: pt.x.clone(), lambda: lambda.clone() }, opts.copositivity.clone())?;
        let ssr = ks.kkt_ssr()?;
        let probe = ks.isos1_probe(&ks.probe_directions()?)?;
        let consistent = !(ssr.is_holds() && probe.is_fails());
        out["kkt_consistency"] = json!({
            "kkt_ssr": ssr.outcome,
            "isos1_probe": probe.outcome,
            "consistent": consistent,
        });
        if !consistent {
            return Err(Error::Invariant("subregularity holds but the probe found a witness".into()));
        }
    }
    Ok(out)
}
