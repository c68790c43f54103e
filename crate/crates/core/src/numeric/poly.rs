use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::linalg::{Matrix, SymMatrix, Vector};
use super::scalar::{fmt_scalar, Scalar};
use crate::error::{check_dim, Error, Result};

/// Multivariate polynomial with exact coefficients. Monomials are exponent
/// vectors; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate function x_{k+1}.
    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Scalar::one());
        p
    }

    /// ⟨c, x⟩ + c0
    pub fn affine(c: &[Scalar], c0: Scalar) -> Self {
        let n = c.len();
        let mut p = Self::constant(n, c0);
        for (k, ck) in c.iter().enumerate() {
            p = p.add(&Self::var(n, k).scale(ck));
        }
        p
    }

    /// ½⟨Q x, x⟩
    pub fn half_quadratic(q: &SymMatrix) -> Self {
        let n = q.dim();
        let half = Scalar::new(1.into(), 2.into());
        let mut p = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let c = q.get(i, j) * &half;
                p = p.add(&Self::var(n, i).mul(&Self::var(n, j)).scale(&c));
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Scalar)> {
        self.terms.iter()
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(exps).or_insert_with(Scalar::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_affine(&self) -> bool {
        self.degree() <= 1
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        match self.degree() {
            0 => Some(self.terms.values().next().cloned().unwrap_or_else(Scalar::zero)),
            _ => None,
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, c: &Scalar) -> Polynomial {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut p = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        (0..k).fold(Self::constant(self.nvars, Scalar::one()), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, x: &[Scalar]) -> Result<Scalar> {
        check_dim(self.nvars, x.len())?;
        let mut total = Scalar::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            total += t;
        }
        Ok(total)
    }

    pub fn derivative(&self, k: usize) -> Polynomial {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[k] -= 1;
            p.add_term(e2, c * Scalar::from_integer(e[k].into()));
        }
        p
    }

    pub fn gradient(&self, x: &[Scalar]) -> Result<Vector> {
        (0..self.nvars).map(|k| self.derivative(k).eval(x)).collect()
    }

    pub fn hessian(&self, x: &[Scalar]) -> Result<SymMatrix> {
        check_dim(self.nvars, x.len())?;
        let mut h = SymMatrix::zeros(self.nvars);
        for i in 0..self.nvars {
            let di = self.derivative(i);
            for j in i..self.nvars {
                h.set(i, j, di.derivative(j).eval(x)?);
            }
        }
        Ok(h)
    }

    /// Parses expressions such as `"x1 - 1/2*x2^2 + (x3 - 1)^3"`.
    pub fn parse(src: &str, nvars: usize) -> Result<Polynomial> {
        let mut p = Parser { src: src.as_bytes(), pos: 0, nvars };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(out)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { column: self.pos + 1, message: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let start = self.pos;
            let rhs = self.unary()?;
            if c == b'*' {
                acc = acc.mul(&rhs);
            } else {
                let d = rhs.as_constant().ok_or_else(|| Error::Parse {
                    column: start + 1,
                    message: "division by a non-constant".into(),
                })?;
                if d.is_zero() {
                    return Err(Error::Parse { column: start + 1, message: "division by zero".into() });
                }
                acc = acc.scale(&(Scalar::one() / d));
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.scale(&-Scalar::one()))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.digits().ok_or_else(|| self.err("expected a nonnegative integer exponent"))?;
            let k: u32 = k.parse().map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                let idx = self.digits().ok_or_else(|| self.err("expected variable index after 'x'"))?;
                let k: usize = idx.parse().map_err(|_| self.err("bad variable index"))?;
                if k == 0 || k > self.nvars {
                    return Err(self.err(&format!("variable x{k} out of range 1..={}", self.nvars)));
                }
                Ok(Polynomial::var(self.nvars, k - 1))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let whole = self.digits().unwrap_or_default();
                let mut text = whole;
                if self.src.get(self.pos) == Some(&b'.') {
                    self.pos += 1;
                    let frac = self.digits().ok_or_else(|| self.err("expected digits after '.'"))?;
                    text = format!("{text}.{frac}");
                }
                let v = super::scalar::parse_scalar(&text)
                    .map_err(|_| Error::Parse { column: start + 1, message: "bad number".into() })?;
                Ok(Polynomial::constant(self.nvars, v))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

impl fmt::Display for Polynomial {
    /// Terms in descending graded order, e.g. `x1^2 - 1/2*x2 + 3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (idx, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if idx == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
                .collect();
            if mono.is_empty() {
                f.write_str(&fmt_scalar(&mag))?;
            } else if mag.is_one() {
                f.write_str(&mono.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_scalar(&mag), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Jacobian of a list of polynomials at `x`, one row per component.
pub fn jacobian(components: &[Polynomial], x: &[Scalar]) -> Result<Matrix> {
    let rows: Vec<Vector> = components.iter().map(|p| p.gradient(x)).collect::<Result<_>>()?;
    Matrix::from_rows(x.len(), &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linalg::from_ints;
    use crate::numeric::scalar::{int, rat};

    #[test]
    fn parse_and_eval() {
        let p = Polynomial::parse("x1 - 1/2*x2^2", 3).unwrap();
        assert_eq!(p.eval(&from_ints(&[1, 2, 0])).unwrap(), int(-1));
        let q = Polynomial::parse("-x1 - 1/2*x1^2 - 1/2*x2^2 - 1/2*x3^2", 3).unwrap();
        assert_eq!(q.hessian(&from_ints(&[0, 0, 0])).unwrap(), SymMatrix::diag(&from_ints(&[-1, -1, -1])));
        let r = Polynomial::parse("(x1 - 1)^2 * 0.5", 1).unwrap();
        assert_eq!(r.eval(&[int(3)]).unwrap(), int(2));
    }

    #[test]
    fn parse_errors_carry_columns() {
        match Polynomial::parse("x1 + x4", 2) {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 8),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Polynomial::parse("x1 / x2", 2).is_err());
        assert!(Polynomial::parse("x1 +", 2).is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["x1^2 - 1/2*x2 + 3", "-x1*x2", "0", "x3^3 + 2*x1"] {
            let p = Polynomial::parse(s, 3).unwrap();
            let back = Polynomial::parse(&p.to_string(), 3).unwrap();
            assert_eq!(p, back, "{s}");
        }
        assert_eq!(Polynomial::parse("x1^2 - 1/2*x2 + 3", 2).unwrap().to_string(), "x1^2 - 1/2*x2 + 3");
    }

    #[test]
    fn gradient_of_cubic() {
        let p = Polynomial::parse("x1^3 + x1*x2", 2).unwrap();
        let g = p.gradient(&[rat(1, 2), int(1)]).unwrap();
        assert_eq!(g, vec![rat(3, 4) + int(1), rat(1, 2)]);
        assert!(!p.is_affine());
        assert!(Polynomial::parse("2*x1 - x2 + 1", 2).unwrap().is_affine());
    }

    #[test]
    fn half_quadratic_matches_form() {
        let q = SymMatrix::from_int_rows(&[&[2, 1], &[1, 4]]);
        let p = Polynomial::half_quadratic(&q);
        let x = from_ints(&[1, -2]);
        assert_eq!(p.eval(&x).unwrap(), q.quad(&x) * rat(1, 2));
        assert_eq!(p.hessian(&x).unwrap(), q);
    }
}
