//! Serialized forms of piecewise functions.

use serde::{Deserialize, Serialize};

use super::{Piece, PwlqFunction};
use crate::error::{Error, Result};
use crate::numeric::linalg::{Matrix, SymMatrix};
use crate::numeric::{ExtScalar, Scalar};
use crate::polyhedra::json::{parse_vector, PolyhedronJson, RatLit};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct PieceJson {
    pub omega: PolyhedronJson,
    #[serde(rename = "A", default)]
    pub quad: Vec<Vec<RatLit>>,
    #[serde(default)]
    pub a: Vec<RatLit>,
    #[serde(default = "zero_lit")]
    pub alpha: RatLit,
}

fn zero_lit() -> RatLit {
    RatLit::Int(0)
}

/// Either an explicit list of pieces or one of the shorthand families.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaJson {
    Pieces { m: usize, pieces: Vec<PieceJson> },
    IndicatorPolyhedron { polyhedron: PolyhedronJson },
    EnlpSeparable { b: Vec<RatLit>, z: Vec<(String, String)> },
}

impl ThetaJson {
    pub fn build(&self) -> Result<PwlqFunction> {
        match self {
            ThetaJson::Pieces { m, pieces } => {
                let ps = pieces.iter().map(|p| p.build(*m)).collect::<Result<Vec<_>>>()?;
                PwlqFunction::new(*m, ps)
            }
            ThetaJson::IndicatorPolyhedron { polyhedron } => PwlqFunction::indicator(polyhedron.to_polyhedron(None)?),
            ThetaJson::EnlpSeparable { b, z } => {
                let b = parse_vector(b)?;
                let bounds = z
                    .iter()
                    .map(|(l, u)| Ok((ExtScalar::parse(l)?, ExtScalar::parse(u)?)))
                    .collect::<Result<Vec<_>>>()?;
                PwlqFunction::enlp_separable(&b, &bounds)
            }
        }
    }

    pub fn from_function(f: &PwlqFunction) -> ThetaJson {
        ThetaJson::Pieces {
            m: f.dim(),
            pieces: f
                .pieces()
                .iter()
                .map(|p| PieceJson {
                    omega: PolyhedronJson::from_polyhedron(&p.omega),
                    quad: (0..f.dim()).map(|i| (0..f.dim()).map(|j| RatLit::from(p.quad.get(i, j))).collect()).collect(),
                    a: p.lin.iter().map(RatLit::from).collect(),
                    alpha: RatLit::from(&p.constant),
                })
                .collect(),
        }
    }
}

impl PieceJson {
    fn build(&self, m: usize) -> Result<Piece> {
        let omega = self.omega.to_polyhedron(Some(m))?;
        let quad = if self.quad.is_empty() {
            SymMatrix::zeros(m)
        } else {
            let rows = self.quad.iter().map(|r| parse_vector(r)).collect::<Result<Vec<_>>>()?;
            SymMatrix::from_full(&Matrix::from_rows(m, &rows)?)?
        };
        let lin = if self.a.is_empty() { vec![Scalar::from_integer(0.into()); m] } else { parse_vector(&self.a)? };
        if lin.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: lin.len() });
        }
        Ok(Piece::new(omega, quad, lin, self.alpha.value()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linalg::from_ints;
    use crate::numeric::int;

    #[test]
    fn parse_shorthands() {
        let t: ThetaJson = toml::from_str(
            r#"
kind = "enlp_separable"
b = ["1", "0"]
z = [["-inf", "inf"], ["-inf", "inf"]]
"#,
        )
        .unwrap();
        let f = t.build().unwrap();
        assert_eq!(f.eval(&from_ints(&[2, 0])).unwrap(), ExtScalar::Finite(int(2)));

        let t: ThetaJson = toml::from_str(
            r#"
kind = "indicator_polyhedron"
polyhedron = { ineq = [["1", "0", "0"], ["0", "1", "0"]] }
"#,
        )
        .unwrap();
        assert_eq!(t.build().unwrap().eval(&from_ints(&[-1, -1])).unwrap(), ExtScalar::Finite(int(0)));
    }

    #[test]
    fn pieces_round_trip() {
        let f = PwlqFunction::enlp_separable(&[int(1)], &[(ExtScalar::Finite(int(0)), ExtScalar::Finite(int(1)))]).unwrap();
        let j = serde_json::to_string(&ThetaJson::from_function(&f)).unwrap();
        let back: ThetaJson = serde_json::from_str(&j).unwrap();
        let g = back.build().unwrap();
        for y in [-2, 0, 1, 3] {
            assert_eq!(f.eval(&[int(y)]).unwrap(), g.eval(&[int(y)]).unwrap());
        }
    }
}
