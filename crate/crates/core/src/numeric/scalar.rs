use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number. `BigRational` keeps itself in lowest terms with a
/// positive denominator, so structural equality is value equality.
pub type Scalar = BigRational;

pub fn int(v: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(v))
}

pub fn rat(p: i64, q: i64) -> Scalar {
    assert!(q != 0, "zero denominator");
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// 2^-k
pub fn pow2_inv(k: u32) -> Scalar {
    Scalar::new(BigInt::one(), BigInt::one() << k)
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-0.25"`.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let t = s.trim();
    let bad = || Error::Parse {
        column: 1,
        message: format!("not a rational number: {s:?}"),
    };
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Scalar::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let neg = whole.trim_start().starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return Err(bad());
        }
        let w: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits.parse().map_err(|_| bad())?
        };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Scalar::new(w * &den + f, den);
        return Ok(if neg { -mag } else { mag });
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Scalar::from_integer(p))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn fmt_scalar(x: &Scalar) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Scalar) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Rational approximation of a float with denominator 2^20; used only when
/// building test inputs from floating data.
pub fn from_f64_approx(v: f64) -> Scalar {
    let den: i64 = 1 << 20;
    Scalar::new(BigInt::from((v * den as f64).round() as i64), BigInt::from(den))
}

pub fn abs(x: &Scalar) -> Scalar {
    x.abs()
}

pub fn lcm_of_denominators<'a>(xs: impl IntoIterator<Item = &'a Scalar>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Extended-real value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtScalar {
    NegInf,
    Finite(Scalar),
    PosInf,
}

impl ExtScalar {
    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            ExtScalar::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtScalar::Finite(_))
    }

    pub fn is_pos_inf(&self) -> bool {
        matches!(self, ExtScalar::PosInf)
    }

    pub fn min(self, other: ExtScalar) -> ExtScalar {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtScalar) -> ExtScalar {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtScalar::NegInf => f64::NEG_INFINITY,
            ExtScalar::PosInf => f64::INFINITY,
            ExtScalar::Finite(v) => to_f64(v),
        }
    }

    /// `"inf"`, `"-inf"` or the canonical rational text.
    pub fn to_text(&self) -> String {
        match self {
            ExtScalar::NegInf => "-inf".into(),
            ExtScalar::PosInf => "inf".into(),
            ExtScalar::Finite(v) => fmt_scalar(v),
        }
    }

    pub fn parse(s: &str) -> Result<ExtScalar> {
        match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(ExtScalar::PosInf),
            "-inf" | "-infinity" => Ok(ExtScalar::NegInf),
            other => parse_scalar(other).map(ExtScalar::Finite),
        }
    }
}

impl From<Scalar> for ExtScalar {
    fn from(v: Scalar) -> Self {
        ExtScalar::Finite(v)
    }
}

impl PartialOrd for ExtScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtScalar::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

/// Addition with the convention that `+inf` absorbs `-inf`, which is the
/// one used for lower semicontinuous convex functions.
impl Add for ExtScalar {
    type Output = ExtScalar;
    fn add(self, rhs: ExtScalar) -> ExtScalar {
        use ExtScalar::*;
        match (self, rhs) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
