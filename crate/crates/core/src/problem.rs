//! TOML problem files: dimensions, the outer function, the inner map, an
//! optional objective and named points.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::composite::{Assumptions, Composite, MsqcAssumption, SmoothMap};
use crate::error::{Error, Result};
use crate::numeric::linalg::{self, Vector};
use crate::numeric::Polynomial;
use crate::optimality::CompositeProblem;
use crate::polyhedra::json::{parse_vector, RatLit};
use crate::pwlq::json::ThetaJson;

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MsqcText {
    #[default]
    Auto,
    Asserted,
    Unknown,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AssumptionsFile {
    pub kappa: Option<RatLit>,
    pub ell: Option<RatLit>,
    #[serde(default)]
    pub msqc: MsqcText,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub x: Vec<RatLit>,
    pub v: Option<Vec<RatLit>>,
    pub lambda: Option<Vec<RatLit>>,
    #[serde(default)]
    pub w: Vec<Vec<RatLit>>,
}

/// A known difference between a computed value and a published one.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiscrepancyNote {
    pub point: Option<String>,
    pub command: Option<String>,
    pub note: String,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub n: usize,
    pub m: usize,
    pub f: Vec<String>,
    pub phi0: Option<String>,
    pub theta: ThetaJson,
    #[serde(default)]
    pub assumptions: AssumptionsFile,
    #[serde(default)]
    pub points: BTreeMap<String, PointFile>,
    #[serde(default)]
    pub discrepancies: Vec<DiscrepancyNote>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub name: String,
    pub x: Vector,
    pub v: Option<Vector>,
    pub lambda: Option<Vector>,
    pub ws: Vec<Vector>,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub problem: CompositeProblem,
    /// True when the file gives an objective; otherwise it is taken as 0.
    pub has_objective: bool,
    pub points: BTreeMap<String, Point>,
    pub discrepancies: Vec<DiscrepancyNote>,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

fn context(what: impl std::fmt::Display) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        Error::Parse { column, message } => Error::Input(format!("{what}: column {column}: {message}")),
        other => other,
    }
}

fn vector(lits: &[RatLit], len: usize, what: &str) -> Result<Vector> {
    let v = parse_vector(lits).map_err(context(what))?;
    if v.len() != len {
        return Err(Error::Input(format!("{what}: expected {len} entries, found {}", v.len())));
    }
    Ok(v)
}

impl ProblemFile {
    pub fn parse(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| {
            let (line, col) = e.span().map_or((0, 0), |s| line_col(src, s.start));
            Error::Input(format!("line {line}, column {col}: {}", e.message()))
        })
    }

    pub fn build(&self) -> Result<Problem> {
        if self.f.len() != self.m {
            return Err(Error::Input(format!("f has {} components but m = {}", self.f.len(), self.m)));
        }
        let components = self
            .f
            .iter()
            .enumerate()
            .map(|(i, s)| Polynomial::parse(s, self.n).map_err(context(format!("f[{}]", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        let f = SmoothMap::new(self.n, components)?;
        let theta = self.theta.build()?;
        if theta.dim() != self.m {
            return Err(Error::Input(format!("theta acts on R^{} but m = {}", theta.dim(), self.m)));
        }
        let a = &self.assumptions;
        let assumptions = Assumptions {
            kappa: a.kappa.as_ref().map(RatLit::value).transpose()?,
            ell: a.ell.as_ref().map(RatLit::value).transpose()?,
            msqc: match a.msqc {
                MsqcText::Auto => MsqcAssumption::Auto,
                MsqcText::Asserted => MsqcAssumption::UserAsserted,
                MsqcText::Unknown => MsqcAssumption::Unknown,
            },
        };
        let composite = Composite::new(theta, f, assumptions)?;
        let objective = match &self.phi0 {
            Some(s) => Polynomial::parse(s, self.n).map_err(context("phi0"))?,
            None => Polynomial::zero(self.n),
        };
        let problem = CompositeProblem::new(objective, composite)?;
        let mut points = BTreeMap::new();
        for (name, p) in &self.points {
            let ws = p
                .w
                .iter()
                .enumerate()
                .map(|(i, w)| vector(w, self.n, &format!("points.{name}.w[{}]", i + 1)))
                .collect::<Result<Vec<_>>>()?;
            points.insert(
                name.clone(),
                Point {
                    name: name.clone(),
                    x: vector(&p.x, self.n, &format!("points.{name}.x"))?,
                    v: p.v.as_ref().map(|v| vector(v, self.n, &format!("points.{name}.v"))).transpose()?,
                    lambda: p.lambda.as_ref().map(|l| vector(l, self.m, &format!("points.{name}.lambda"))).transpose()?,
                    ws,
                },
            );
        }
        Ok(Problem {
            name: self.name.clone().unwrap_or_else(|| "problem".into()),
            problem,
            has_objective: self.phi0.is_some(),
            points,
            discrepancies: self.discrepancies.clone(),
        })
    }
}

impl Problem {
    pub fn from_toml(src: &str) -> Result<Self> {
        ProblemFile::parse(src)?.build()
    }

    /// The named point, or the first one in name order.
    pub fn point(&self, name: Option<&str>) -> Result<&Point> {
        match name {
            Some(n) => self.points.get(n).ok_or_else(|| Error::Input(format!("no point named {n:?}"))),
            None => self.points.values().next().ok_or_else(|| Error::Input("problem has no points".into())),
        }
    }

    /// v̄ from the point, else -∇φ₀(x̄) when an objective is given.
    pub fn target(&self, point: &Point) -> Result<Option<Vector>> {
        if let Some(v) = &point.v {
            return Ok(Some(v.clone()));
        }
        if self.has_objective {
            return Ok(Some(linalg::neg(&self.problem.objective.gradient(&point.x)?)));
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = r#"
name = "half line"
n = 1
m = 1
f = ["x1"]
phi0 = "-x1"

[theta]
kind = "indicator_polyhedron"
polyhedron = { ineq = [["1", "0"]] }

[points.origin]
x = ["0"]
lambda = [1]
w = [["-1"], ["1/2"]]
"#;

    #[test]
    fn parses_a_small_problem() {
        let p = Problem::from_toml(SRC).unwrap();
        assert_eq!(p.name, "half line");
        let pt = p.point(None).unwrap();
        assert_eq!(pt.ws.len(), 2);
        assert_eq!(p.target(pt).unwrap().unwrap(), crate::numeric::linalg::from_ints(&[1]));
    }

    #[test]
    fn reports_line_and_column() {
        let err = Problem::from_toml("n = 1\nm = oops\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn polynomial_errors_name_the_field() {
        let src = SRC.replace("f = [\"x1\"]", "f = [\"x1 +\"]");
        let err = Problem::from_toml(&src).unwrap_err();
        assert!(err.to_string().contains("f[1]"), "{err}");
    }

    #[test]
    fn rejects_wrong_lengths() {
        let src = SRC.replace("x = [\"0\"]", "x = [\"0\", \"1\"]");
        assert!(matches!(Problem::from_toml(&src), Err(Error::Input(_))));
    }
}
