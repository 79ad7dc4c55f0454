//! Exact arithmetic and linear algebra over a prime field GF(p), p ≥ 3.
//!
//! Elements are plain residues wrapped in [`Fe`]; the modulus lives in a
//! [`FieldSpec`] which performs every operation. All routines are pure.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default field size used by the CLI and the demo.
pub const DEFAULT_P: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field size {0} is too small, need p >= 3")]
    TooSmall(u32),
    #[error("field size {0} is not prime")]
    NonPrime(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("singular system: rank {rank} < dimension {dim}")]
    SingularMatrix { rank: usize, dim: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A residue in `[0, p)`. Only meaningful together with the [`FieldSpec`]
/// that produced it.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let n = n as u64;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The prime field GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct FieldSpec {
    p: u32,
}

impl TryFrom<u32> for FieldSpec {
    type Error = FieldError;

    fn try_from(p: u32) -> Result<Self, Self::Error> {
        FieldSpec::new(p)
    }
}

impl From<FieldSpec> for u32 {
    fn from(spec: FieldSpec) -> u32 {
        spec.p
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec { p: DEFAULT_P }
    }
}

impl FieldSpec {
    pub fn new(p: u32) -> Result<Self, FieldError> {
        if p < 3 {
            return Err(FieldError::TooSmall(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NonPrime(p));
        }
        Ok(FieldSpec { p })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Bits carried by one field symbol, `log2 p`.
    pub fn rate_unit(&self) -> f64 {
        f64::from(self.p).log2()
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(&self, v: u64) -> Fe {
        Fe((v % u64::from(self.p)) as u32)
    }

    /// Reduces a signed integer into the field.
    pub fn elem_i64(&self, v: i64) -> Fe {
        Fe(v.rem_euclid(i64::from(self.p)) as u32)
    }

    /// Iterates every element, zero first.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.p).map(Fe)
    }

    /// Iterates the `p - 1` nonzero elements.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fe> {
        (1..self.p).map(Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let s = u64::from(a.0) + u64::from(b.0);
        Fe((s % u64::from(self.p)) as u32)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.0 == 0 {
            a
        } else {
            Fe(self.p - a.0)
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(((u64::from(a.0) * u64::from(b.0)) % u64::from(self.p)) as u32)
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: Fe) -> Result<Fe, LinalgError> {
        if a.0 == 0 {
            return Err(LinalgError::ZeroInverse);
        }
        let (mut r0, mut r1) = (i64::from(self.p), i64::from(a.0));
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.elem_i64(t0))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, LinalgError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Inner product of two equal-length slices.
    pub fn dot(&self, a: &[Fe], b: &[Fe]) -> Fe {
        a.iter()
            .zip(b)
            .fold(Fe::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }
}

/// Free-function form of [`FieldSpec::inv`].
pub fn field_inv(x: Fe, spec: &FieldSpec) -> Result<Fe, LinalgError> {
    spec.inv(x)
}

/// Dense row-major matrix over GF(p).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![Fe::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Fe::ONE;
        }
        m
    }

    /// Builds a matrix from raw integer rows, reducing every entry mod p.
    pub fn from_rows<R: AsRef<[u64]>>(spec: &FieldSpec, rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = spec.elem(v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Fe] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn mul_vec(&self, spec: &FieldSpec, x: &[Fe]) -> Result<Vec<Fe>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| spec.dot(self.row(i), x)).collect())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Fe;

    fn index(&self, (i, j): (usize, usize)) -> &Fe {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Fe {
        assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Reduces `m` in place to reduced row echelon form, applying the same row
/// operations to `rhs` when given. Returns the pivot column of each nonzero
/// row, in row order.
fn rref(spec: &FieldSpec, m: &mut Matrix, mut rhs: Option<&mut [Fe]>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        // first nonzero entry in the column wins
        let Some(pr) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
            continue;
        };
        m.swap_rows(r, pr);
        if let Some(b) = rhs.as_deref_mut() {
            b.swap(r, pr);
        }
        let inv = spec.inv(m[(r, c)]).expect("pivot is nonzero");
        for v in m.row_mut(r) {
            *v = spec.mul(*v, inv);
        }
        if let Some(b) = rhs.as_deref_mut() {
            b[r] = spec.mul(b[r], inv);
        }
        for i in 0..m.rows {
            if i == r {
                continue;
            }
            let f = m[(i, c)];
            if f.is_zero() {
                continue;
            }
            for j in c..m.cols {
                let t = spec.mul(f, m[(r, j)]);
                m[(i, j)] = spec.sub(m[(i, j)], t);
            }
            if let Some(b) = rhs.as_deref_mut() {
                let t = spec.mul(f, b[r]);
                b[i] = spec.sub(b[i], t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Row rank over GF(p).
pub fn rank(spec: &FieldSpec, a: &Matrix) -> usize {
    let mut m = a.clone();
    rref(spec, &mut m, None).len()
}

/// Solves the square system `A x = b` exactly.
pub fn solve_linear_system(spec: &FieldSpec, a: &Matrix, b: &[Fe]) -> Result<Vec<Fe>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    if b.len() != a.rows {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows,
            got: b.len(),
        });
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let pivots = rref(spec, &mut m, Some(&mut x));
    if pivots.len() < a.rows {
        return Err(LinalgError::SingularMatrix {
            rank: pivots.len(),
            dim: a.rows,
        });
    }
    Ok(x)
}

/// Recovers every unknown that the (possibly under-determined) system pins
/// down uniquely. Unknown `k` is identifiable iff the unit vector `e_k` lies
/// in the row space of `A`; such coordinates get `Some(value)`, the rest
/// `None`. The system is assumed consistent.
pub fn solve_identifiable(
    spec: &FieldSpec,
    a: &Matrix,
    b: &[Fe],
) -> Result<Vec<Option<Fe>>, LinalgError> {
    if b.len() != a.rows {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows,
            got: b.len(),
        });
    }
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let pivots = rref(spec, &mut m, Some(&mut rhs));
    let mut out = vec![None; a.cols];
    for (r, &c) in pivots.iter().enumerate() {
        // In RREF the row is e_c plus entries in free columns only.
        let clean = (0..a.cols).all(|j| j == c || m[(r, j)].is_zero());
        if clean {
            out[c] = Some(rhs[r]);
        }
    }
    Ok(out)
}
