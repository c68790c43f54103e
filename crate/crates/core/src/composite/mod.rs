//! Compositions φ = ϑ∘f with first- and second-order chain rules.

mod second;
mod site;
mod smooth;
mod sum;

pub use second::{MultiplierAnalysis, MultiplierLp, ParabolicDual};
pub use site::{BoundedMultiplier, Site};
pub use smooth::SmoothMap;
pub use sum::sum_compose;

use crate::error::Result;
use crate::numeric::{ExtScalar, Scalar};
use crate::pwlq::PwlqFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsqcAssumption {
    /// Decide at the point through the qualification cascade.
    Auto,
    UserAsserted,
    /// Treat the qualification as unavailable: chain rules are refused.
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assumptions {
    pub kappa: Option<Scalar>,
    pub ell: Option<Scalar>,
    pub msqc: MsqcAssumption,
}

impl Default for Assumptions {
    fn default() -> Self {
        Assumptions { kappa: None, ell: None, msqc: MsqcAssumption::Auto }
    }
}

#[derive(Clone, Debug)]
pub struct Composite {
    pub theta: PwlqFunction,
    pub f: SmoothMap,
    pub assumptions: Assumptions,
}

impl Composite {
    pub fn new(theta: PwlqFunction, f: SmoothMap, assumptions: Assumptions) -> Result<Self> {
        crate::error::check_dim(theta.dim(), f.m())?;
        Ok(Composite { theta, f, assumptions })
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn m(&self) -> usize {
        self.f.m()
    }

    pub fn eval(&self, x: &[Scalar]) -> Result<ExtScalar> {
        self.theta.eval(&self.f.eval(x)?)
    }
}
