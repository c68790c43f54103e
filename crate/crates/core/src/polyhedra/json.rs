//! `{"dim": n, "ineq": [[a..., b]...], "eq": [[a..., b]...]}` with rational strings.

use serde::{Deserialize, Serialize};

use super::{Constraint, Polyhedron};
use crate::error::{Error, Result};
use crate::numeric::scalar::{fmt_scalar, parse_scalar};
use crate::numeric::linalg::Vector;
use crate::numeric::Scalar;

/// Rational literal accepted from input files: `"p/q"` or a bare integer.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum RatLit {
    Int(i64),
    Text(String),
}

impl RatLit {
    pub fn value(&self) -> Result<Scalar> {
        match self {
            RatLit::Int(v) => Ok(crate::numeric::int(*v)),
            RatLit::Text(s) => parse_scalar(s),
        }
    }
}

impl From<&Scalar> for RatLit {
    fn from(v: &Scalar) -> Self {
        RatLit::Text(fmt_scalar(v))
    }
}

pub fn parse_vector(v: &[RatLit]) -> Result<Vector> {
    v.iter().map(RatLit::value).collect()
}

pub fn text_vector(v: &[Scalar]) -> Vec<String> {
    v.iter().map(fmt_scalar).collect()
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct PolyhedronJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default)]
    pub ineq: Vec<Vec<RatLit>>,
    #[serde(default)]
    pub eq: Vec<Vec<RatLit>>,
}

impl PolyhedronJson {
    pub fn from_polyhedron(p: &Polyhedron) -> Self {
        let row = |c: &Constraint| {
            let mut r: Vec<RatLit> = c.row.iter().map(RatLit::from).collect();
            r.push(RatLit::from(&c.rhs));
            r
        };
        PolyhedronJson {
            dim: Some(p.dim()),
            ineq: p.ineqs().iter().map(row).collect(),
            eq: p.eqs().iter().map(row).collect(),
        }
    }

    pub fn to_polyhedron(&self, default_dim: Option<usize>) -> Result<Polyhedron> {
        let dim = self
            .dim
            .or_else(|| self.ineq.iter().chain(&self.eq).next().map(|r| r.len().saturating_sub(1)))
            .or(default_dim)
            .ok_or_else(|| Error::Input("polyhedron without rows needs an explicit dim".into()))?;
        let conv = |rows: &[Vec<RatLit>]| -> Result<Vec<Constraint>> {
            rows.iter()
                .map(|r| {
                    if r.len() != dim + 1 {
                        return Err(Error::DimensionMismatch { expected: dim + 1, found: r.len() });
                    }
                    let v = parse_vector(r)?;
                    Ok(Constraint::new(v[..dim].to_vec(), v[dim].clone()))
                })
                .collect()
        };
        Polyhedron::new(dim, conv(&self.ineq)?, conv(&self.eq)?)
    }
}

pub fn to_json(p: &Polyhedron) -> serde_json::Value {
    serde_json::to_value(PolyhedronJson::from_polyhedron(p)).expect("serializable")
}

pub fn from_json(v: &serde_json::Value) -> Result<Polyhedron> {
    let pj: PolyhedronJson = serde_json::from_value(v.clone()).map_err(|e| Error::Input(e.to_string()))?;
    pj.to_polyhedron(None)
}
