use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::scalar::{lcm_of_denominators, Scalar};
use crate::error::{check_dim, Error, Result};

pub type Vector = Vec<Scalar>;

pub fn zeros(n: usize) -> Vector {
    vec![Scalar::zero(); n]
}

pub fn unit(n: usize, k: usize) -> Vector {
    let mut v = zeros(n);
    v[k] = Scalar::one();
    v
}

pub fn from_ints(xs: &[i64]) -> Vector {
    xs.iter().map(|&x| super::scalar::int(x)).collect()
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Scalar::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(c: &Scalar, a: &[Scalar]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

pub fn neg(a: &[Scalar]) -> Vector {
    a.iter().map(|x| -x).collect()
}

/// a + c*b
pub fn axpy(a: &[Scalar], c: &Scalar, b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

pub fn is_zero(a: &[Scalar]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn norm1(a: &[Scalar]) -> Scalar {
    a.iter().fold(Scalar::zero(), |acc, x| acc + x.abs())
}

pub fn norm_inf(a: &[Scalar]) -> Scalar {
    a.iter().map(|x| x.abs()).max().unwrap_or_else(Scalar::zero)
}

pub fn norm2_sq(a: &[Scalar]) -> Scalar {
    dot(a, a)
}

/// Positive multiple of `v` with coprime integer entries. The zero vector is
/// returned unchanged.
pub fn primitive(v: &[Scalar]) -> Vector {
    if is_zero(v) {
        return v.to_vec();
    }
    let l = lcm_of_denominators(v);
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Scalar::from_integer(l.clone())).to_integer()).collect();
    let g = ints
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.into_iter().map(|x| Scalar::from_integer(x / &g)).collect()
}

/// Like [`primitive`] but also fixes the sign so the first nonzero entry is
/// positive. Used for bases of subspaces, where sign carries no meaning.
pub fn primitive_signed(v: &[Scalar]) -> Vector {
    let p = primitive(v);
    match p.iter().find(|x| !x.is_zero()) {
        Some(first) if first.is_negative() => neg(&p),
        _ => p,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[Vector]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            data.extend(r.iter().cloned());
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn from_cols(rows: usize, cols: &[Vector]) -> Result<Self> {
        Ok(Self::from_rows(rows, cols)?.transpose())
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rs: Vec<Vector> = rows.iter().map(|r| from_ints(r)).collect();
        Self::from_rows(cols, &rs).expect("ragged integer matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn col(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vector> {
        check_dim(self.cols, v.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// selfᵀ v
    pub fn tmul_vec(&self, v: &[Scalar]) -> Result<Vector> {
        check_dim(self.rows, v.len())?;
        let mut out = zeros(self.cols);
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Induced ∞-norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> Scalar {
        (0..self.rows).map(|i| norm1(self.row(i))).max().unwrap_or_else(Scalar::zero)
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }

    /// Basis of {x : self x = 0}, one vector per free column of the reduced
    /// row echelon form, each scaled to primitive integers.
    pub fn nullspace(&self) -> Vec<Vector> {
        let (r, pivots) = rref(self);
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = zeros(self.cols);
            v[free] = Scalar::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(row, free).clone();
            }
            basis.push(primitive_signed(&v));
        }
        basis
    }

    /// One solution of `self x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[Scalar]) -> Result<Option<Vector>> {
        check_dim(self.rows, b.len())?;
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = rref(&aug);
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = zeros(self.cols);
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r.get(row, self.cols).clone();
        }
        Ok(Some(x))
    }
}

/// Reduced row echelon form and the pivot columns.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row >= a.rows {
            break;
        }
        let Some(p) = (row..a.rows).find(|&i| !a.get(i, col).is_zero()) else {
            continue;
        };
        if p != row {
            for j in 0..a.cols {
                a.data.swap(p * a.cols + j, row * a.cols + j);
            }
        }
        let inv = Scalar::one() / a.get(row, col);
        for j in 0..a.cols {
            let v = a.get(row, j) * &inv;
            a.set(row, j, v);
        }
        for i in 0..a.rows {
            if i == row || a.get(i, col).is_zero() {
                continue;
            }
            let f = a.get(i, col).clone();
            for j in 0..a.cols {
                let v = a.get(i, j) - &f * a.get(row, j);
                a.set(i, j, v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Rank of a family of vectors of length `dim`.
pub fn rank_of(dim: usize, vs: &[Vector]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    Matrix::from_rows(dim, vs).map(|m| m.rank()).unwrap_or(0)
}

/// Basis (in reduced form) of the span of `vs`.
pub fn span_basis(dim: usize, vs: &[Vector]) -> Vec<Vector> {
    if vs.is_empty() {
        return Vec::new();
    }
    let m = Matrix::from_rows(dim, vs).expect("span vectors of uneven length");
    let (r, pivots) = rref(&m);
    (0..pivots.len()).map(|i| primitive_signed(r.row(i))).collect()
}

/// Symmetric matrix stored as its upper triangle, row by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<Scalar>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, upper: vec![Scalar::zero(); n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![Scalar::one(); n])
    }

    pub fn diag(d: &[Scalar]) -> Self {
        let mut s = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            s.set(i, i, v.clone());
        }
        s
    }

    pub fn from_full(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
        }
        let n = m.rows();
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::Input(format!("matrix is not symmetric at ({i},{j})")));
                }
                s.set(i, j, m.get(i, j).clone());
            }
        }
        Ok(s)
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_full(&Matrix::from_int_rows(rows)).expect("not symmetric")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.upper[self.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        let k = self.idx(i, j);
        self.upper[k] = v;
    }

    pub fn to_full(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(Zero::is_zero)
    }

    pub fn apply(&self, w: &[Scalar]) -> Vector {
        (0..self.n)
            .map(|i| (0..self.n).fold(Scalar::zero(), |acc, j| acc + self.get(i, j) * &w[j]))
            .collect()
    }

    /// ⟨S w, v⟩
    pub fn bilinear(&self, w: &[Scalar], v: &[Scalar]) -> Scalar {
        dot(&self.apply(w), v)
    }

    /// ⟨S w, w⟩
    pub fn quad(&self, w: &[Scalar]) -> Scalar {
        self.bilinear(w, w)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix { n: self.n, upper: add(&self.upper, &other.upper) }
    }

    pub fn scaled(&self, c: &Scalar) -> SymMatrix {
        SymMatrix { n: self.n, upper: scale(c, &self.upper) }
    }

    /// Bᵀ S B for an n×k matrix B.
    pub fn congruence(&self, b: &Matrix) -> SymMatrix {
        assert_eq!(b.rows(), self.n);
        let sb = self.to_full().mul(b).expect("shape");
        let full = b.transpose().mul(&sb).expect("shape");
        SymMatrix::from_full(&full).expect("congruence keeps symmetry")
    }

    /// Exact LDLᵀ-style test by symmetric Gaussian elimination.
    pub fn is_positive_definite(&self) -> bool {
        self.definiteness(true)
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.definiteness(false)
    }

    fn definiteness(&self, strict: bool) -> bool {
        let n = self.n;
        let mut a = self.to_full();
        let mut active: Vec<usize> = (0..n).collect();
        while !active.is_empty() {
            // Pick the first positive diagonal pivot; a zero diagonal forces a
            // zero row for semidefiniteness.
            let mut pivot = None;
            for &k in &active {
                let d = a.get(k, k);
                if d.is_negative() {
                    return false;
                }
                if d.is_zero() {
                    if strict {
                        return false;
                    }
                    if active.iter().any(|&j| !a.get(k, j).is_zero()) {
                        return false;
                    }
                } else if pivot.is_none() {
                    pivot = Some(k);
                }
            }
            let Some(k) = pivot else {
                return true;
            };
            active.retain(|&j| j != k);
            let dk = a.get(k, k).clone();
            for &i in &active {
                let f = a.get(i, k) / &dk;
                if f.is_zero() {
                    continue;
                }
                for &j in &active {
                    let v = a.get(i, j) - &f * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
        true
    }
}

/// Vector of bilinear values ⟨H_k w, v⟩ for a list of Hessians.
pub fn hessian_apply(hessians: &[SymMatrix], w: &[Scalar], v: &[Scalar]) -> Vector {
    hessians.iter().map(|h| h.bilinear(w, v)).collect()
}

/// Σ c_k H_k
pub fn weighted_sum(hessians: &[SymMatrix], c: &[Scalar], n: usize) -> SymMatrix {
    hessians
        .iter()
        .zip(c)
        .fold(SymMatrix::zeros(n), |acc, (h, ck)| if ck.is_zero() { acc } else { acc.add(&h.scaled(ck)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::scalar::{int, rat};

    #[test]
    fn nullspace_and_rank() {
        let m = Matrix::from_int_rows(&[&[1, -1, 0], &[0, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let ns = m.nullspace();
        assert_eq!(ns, vec![from_ints(&[1, 1, 0])]);
        assert!(is_zero(&m.mul_vec(&ns[0]).unwrap()));
    }

    #[test]
    fn solve_consistent_and_not() {
        let m = Matrix::from_int_rows(&[&[1, 1], &[2, 2]]);
        assert!(m.solve(&from_ints(&[1, 3])).unwrap().is_none());
        let x = m.solve(&from_ints(&[1, 2])).unwrap().unwrap();
        assert_eq!(m.mul_vec(&x).unwrap(), from_ints(&[1, 2]));
    }

    #[test]
    fn primitive_scaling() {
        let v = vec![rat(1, 2), rat(-3, 4), int(0)];
        assert_eq!(primitive(&v), from_ints(&[2, -3, 0]));
        assert_eq!(primitive_signed(&neg(&v)), from_ints(&[2, -3, 0]));
    }

    #[test]
    fn sym_storage_and_forms() {
        let s = SymMatrix::from_int_rows(&[&[2, 1], &[1, 3]]);
        assert_eq!(s.get(1, 0), &int(1));
        assert_eq!(s.quad(&from_ints(&[1, 1])), int(7));
        assert!(s.is_positive_definite());
        let t = SymMatrix::from_int_rows(&[&[1, 1], &[1, 1]]);
        assert!(!t.is_positive_definite());
        assert!(t.is_positive_semidefinite());
        let u = SymMatrix::from_int_rows(&[&[0, 1], &[1, 0]]);
        assert!(!u.is_positive_semidefinite());
        let z = SymMatrix::from_int_rows(&[&[0, 0], &[0, 2]]);
        assert!(z.is_positive_semidefinite());
    }

    #[test]
    fn congruence_restricts() {
        let s = SymMatrix::diag(&from_ints(&[1, -1]));
        let b = Matrix::from_cols(2, &[from_ints(&[1, 0])]).unwrap();
        assert!(s.congruence(&b).is_positive_definite());
    }

    #[test]
    fn hessian_apply_matches_bilinear() {
        let h = vec![SymMatrix::diag(&from_ints(&[0, -1, 0])), SymMatrix::diag(&from_ints(&[0, 0, -1])), SymMatrix::diag(&from_ints(&[-1, -1, -1]))];
        let w = from_ints(&[0, 1, 1]);
        assert_eq!(hessian_apply(&h, &w, &w), from_ints(&[-1, -1, -2]));
    }
}
