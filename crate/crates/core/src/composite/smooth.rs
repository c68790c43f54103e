use crate::error::{check_dim, Error, Result};
use crate::numeric::linalg::{Matrix, SymMatrix, Vector};
use crate::numeric::poly::jacobian;
use crate::numeric::{Polynomial, Scalar};

/// Polynomial map f : R^n -> R^m.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothMap {
    n: usize,
    components: Vec<Polynomial>,
}

impl SmoothMap {
    pub fn new(n: usize, components: Vec<Polynomial>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Input("map needs at least one component".into()));
        }
        for p in &components {
            check_dim(n, p.nvars())?;
        }
        Ok(SmoothMap { n, components })
    }

    pub fn parse(n: usize, texts: &[impl AsRef<str>]) -> Result<Self> {
        let comps = texts.iter().map(|t| Polynomial::parse(t.as_ref(), n)).collect::<Result<Vec<_>>>()?;
        Self::new(n, comps)
    }

    /// x ↦ M x + c
    pub fn affine(m: &Matrix, c: &[Scalar]) -> Result<Self> {
        check_dim(m.rows(), c.len())?;
        let comps = (0..m.rows()).map(|i| Polynomial::affine(m.row(i), c[i].clone())).collect();
        Self::new(m.cols(), comps)
    }

    pub fn identity(n: usize) -> Self {
        Self::affine(&Matrix::identity(n), &vec![Scalar::from_integer(0.into()); n]).expect("shape")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn is_affine(&self) -> bool {
        self.components.iter().all(Polynomial::is_affine)
    }

    pub fn eval(&self, x: &[Scalar]) -> Result<Vector> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    pub fn jacobian(&self, x: &[Scalar]) -> Result<Matrix> {
        jacobian(&self.components, x)
    }

    pub fn hessians(&self, x: &[Scalar]) -> Result<Vec<SymMatrix>> {
        self.components.iter().map(|p| p.hessian(x)).collect()
    }

    /// Concatenation (f_1, ..., f_s).
    pub fn stack(parts: &[&SmoothMap]) -> Result<Self> {
        let n = parts.first().map(|p| p.n).ok_or_else(|| Error::Input("nothing to stack".into()))?;
        let mut comps = Vec::new();
        for p in parts {
            check_dim(n, p.n)?;
            comps.extend(p.components.iter().cloned());
        }
        Self::new(n, comps)
    }
}
