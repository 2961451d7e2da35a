//! Exact linear algebra over prime fields and the rationals.
//!
//! Scalars are stored as `BigRational` in both cases. Over `F_p` every stored
//! entry is an integer in `[0, p)`, so structural equality of matrices is
//! equality of linear maps.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The scalar field of a vector space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Prime(u64),
    Rationals,
}

pub type Scalar = BigRational;

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    pub fn prime(p: u64) -> Result<Field> {
        if is_prime(p) {
            Ok(Field::Prime(p))
        } else {
            Err(Error::Precondition(format!("{p} is not prime")))
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Field::Prime(p) if !is_prime(*p) => {
                Err(Error::Precondition(format!("{p} is not prime")))
            }
            _ => Ok(()),
        }
    }

    pub fn zero(&self) -> Scalar {
        Scalar::zero()
    }

    pub fn one(&self) -> Scalar {
        Scalar::one()
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        self.reduce(Scalar::from_integer(BigInt::from(v)))
    }

    /// Brings an arbitrary rational into canonical form for this field.
    pub fn reduce(&self, x: Scalar) -> Scalar {
        match self {
            Field::Rationals => x,
            Field::Prime(p) => {
                let p = BigInt::from(*p);
                let num = x.numer().mod_floor(&p);
                let den = x.denom().mod_floor(&p);
                let inv = mod_inverse(&den, &p).expect("denominator divisible by p");
                Scalar::from_integer((num * inv).mod_floor(&p))
            }
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.reduce(a + b)
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.reduce(a - b)
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.reduce(a * b)
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        self.reduce(-a)
    }

    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        if a.is_zero() {
            return None;
        }
        match self {
            Field::Rationals => Some(a.recip()),
            Field::Prime(p) => {
                let p = BigInt::from(*p);
                mod_inverse(&a.to_integer(), &p).map(Scalar::from_integer)
            }
        }
    }

    /// Number of elements, if finite.
    pub fn order(&self) -> Option<u64> {
        match self {
            Field::Prime(p) => Some(*p),
            Field::Rationals => None,
        }
    }

    /// The `i`-th element in the enumeration `0, 1, ..., p-1` of a prime field.
    pub fn element(&self, i: u64) -> Scalar {
        Scalar::from_integer(BigInt::from(i))
    }

    /// Index of an element of a prime field in the enumeration order.
    pub fn index_of(&self, a: &Scalar) -> Option<u64> {
        match self {
            Field::Prime(_) => a.to_integer().to_u64(),
            Field::Rationals => None,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Prime(p) => write!(f, "F{p}"),
            Field::Rationals => write!(f, "Q"),
        }
    }
}

fn mod_inverse(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return None;
    }
    let g = a.extended_gcd(p);
    if !g.gcd.is_one() {
        return None;
    }
    Some(g.x.mod_floor(p))
}

/// Primes small enough for products of residues to fit in a `u64`.
fn small_prime(field: Field) -> Option<u64> {
    match field {
        Field::Prime(p) if p < (1 << 31) => Some(p),
        _ => None,
    }
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Dense row-major matrix with exact entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Scalar::one();
        }
        m
    }

    /// Builds a matrix from rows, reducing every entry into `field`.
    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>, cols: usize) -> Result<Self> {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Structural(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row.into_iter().map(|x| field.reduce(x)));
        }
        Ok(Matrix {
            rows: nrows,
            cols,
            data,
        })
    }

    pub fn from_i64(field: Field, rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Matrix::from_rows(field, rows, cols).expect("ragged rows")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, rhs: &Matrix, field: Field) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix shape mismatch");
        if let Some(p) = small_prime(field) {
            let (a, b) = (self.residues(p), rhs.residues(p));
            let mut out = vec![0u64; self.rows * rhs.cols];
            for i in 0..self.rows {
                for k in 0..self.cols {
                    let x = a[i * self.cols + k];
                    if x == 0 {
                        continue;
                    }
                    for j in 0..rhs.cols {
                        let o = &mut out[i * rhs.cols + j];
                        *o = (*o + x * b[k * rhs.cols + j]) % p;
                    }
                }
            }
            return Matrix::from_residues(self.rows, rhs.cols, out);
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = &out.data[idx] + a * b;
                }
            }
        }
        if let Field::Prime(_) = field {
            for x in out.data.iter_mut() {
                *x = field.reduce(std::mem::take(x));
            }
        }
        out
    }

    pub fn add(&self, rhs: &Matrix, field: Field) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| field.add(a, b))
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &Matrix, field: Field) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| field.sub(a, b))
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, c: &Scalar, field: Field) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| field.mul(a, c)).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Selects the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.get(i, c).clone());
            }
        }
        out
    }

    /// Column block `[start, start + width)`.
    pub fn column_block(&self, start: usize, width: usize) -> Matrix {
        let cols: Vec<usize> = (start..start + width).collect();
        self.select_columns(&cols)
    }

    /// Horizontal concatenation. All blocks must share the row count `rows`.
    pub fn hstack(rows: usize, blocks: &[&Matrix]) -> Matrix {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack row mismatch");
            for i in 0..rows {
                for j in 0..b.cols {
                    out.set(i, off + j, b.get(i, j).clone());
                }
            }
            off += b.cols;
        }
        out
    }

    /// Entries as residues modulo `p`.
    fn residues(&self, p: u64) -> Vec<u64> {
        let pb = BigInt::from(p);
        self.data
            .iter()
            .map(|x| {
                if x.is_integer() {
                    x.numer().mod_floor(&pb).to_u64().expect("residue fits")
                } else {
                    Field::Prime(p).reduce(x.clone()).to_integer().to_u64().expect("residue fits")
                }
            })
            .collect()
    }

    fn from_residues(rows: usize, cols: usize, data: Vec<u64>) -> Matrix {
        Matrix {
            rows,
            cols,
            data: data.into_iter().map(|v| Scalar::from_integer(BigInt::from(v))).collect(),
        }
    }

    fn rref_mod(&self, p: u64) -> (Matrix, Vec<usize>) {
        let (rows, cols) = (self.rows, self.cols);
        let mut m = self.residues(p);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(piv) = (r..rows).find(|&i| m[i * cols + c] != 0) else {
                continue;
            };
            if piv != r {
                for j in 0..cols {
                    m.swap(piv * cols + j, r * cols + j);
                }
            }
            let inv = pow_mod(m[r * cols + c], p - 2, p);
            for j in c..cols {
                m[r * cols + j] = m[r * cols + j] * inv % p;
            }
            for i in 0..rows {
                let factor = m[i * cols + c];
                if i == r || factor == 0 {
                    continue;
                }
                for j in c..cols {
                    let sub = factor * m[r * cols + j] % p;
                    m[i * cols + j] = (m[i * cols + j] + p - sub) % p;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (Matrix::from_residues(rows, cols, m), pivots)
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self, field: Field) -> (Matrix, Vec<usize>) {
        if let Some(p) = small_prime(field) {
            return self.rref_mod(p);
        }
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(p, r);
            let inv = field.inv(m.get(r, c)).expect("nonzero pivot");
            for j in 0..m.cols {
                let v = field.mul(m.get(r, j), &inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let factor = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = field.sub(m.get(i, j), &field.mul(&factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, field: Field) -> usize {
        self.rref(field).1.len()
    }

    /// Basis of the kernel, as the columns of the returned `cols x k` matrix.
    /// The basis is the standard one attached to the free columns of the RREF.
    pub fn kernel(&self, field: Field) -> Matrix {
        let (r, pivots) = self.rref(field);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            out.set(f, k, Scalar::one());
            for (row, &p) in pivots.iter().enumerate() {
                let v = field.neg(r.get(row, f));
                out.set(p, k, v);
            }
        }
        out
    }

    pub fn inverse(&self, field: Field) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = Matrix::hstack(n, &[self, &Matrix::identity(n)]);
        let (r, pivots) = aug.rref(field);
        if pivots.len() < n || (n > 0 && pivots[n - 1] >= n) {
            return None;
        }
        Some(r.column_block(n, n))
    }

    /// One solution `x` of `self * x = b` (b a column matrix), if any.
    pub fn solve(&self, b: &Matrix, field: Field) -> Option<Matrix> {
        assert_eq!(b.rows, self.rows);
        let aug = Matrix::hstack(self.rows, &[self, b]);
        let (r, pivots) = aug.rref(field);
        let n = self.cols;
        if pivots.iter().any(|&p| p >= n) {
            return None;
        }
        let mut x = Matrix::zeros(n, b.cols);
        for (row, &p) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(p, j, r.get(row, n + j).clone());
            }
        }
        Some(x)
    }

    /// Quotient of `field^cols` by the row space of `self`: returns the
    /// projection (`q x cols`) and a section (`cols x q`) whose coordinates
    /// are the non-pivot columns of the RREF.
    pub fn quotient_by_rows(&self, field: Field) -> (Matrix, Matrix) {
        let (r, pivots) = self.rref(field);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut proj = Matrix::zeros(free.len(), self.cols);
        let mut sect = Matrix::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            proj.set(k, f, Scalar::one());
            sect.set(f, k, Scalar::one());
            for (row, &p) in pivots.iter().enumerate() {
                let v = r.get(row, f);
                if !v.is_zero() {
                    proj.set(k, p, field.neg(v));
                }
            }
        }
        (proj, sect)
    }

    /// Column vector from a slice.
    pub fn column(entries: Vec<Scalar>) -> Matrix {
        Matrix {
            rows: entries.len(),
            cols: 1,
            data: entries,
        }
    }

    /// Entries rendered as exact strings (`"3"`, `"-1/2"`), row-major.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect()
    }

    pub fn from_strings(field: Field, rows: &[Vec<String>], cols: usize) -> Result<Matrix> {
        let parsed = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| {
                        s.parse::<Scalar>()
                            .map_err(|e| Error::Structural(format!("bad scalar {s:?}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(field, parsed, cols)
    }

    /// Largest absolute numerator, used only for diagnostics.
    pub fn max_abs_numerator(&self) -> BigInt {
        self.data
            .iter()
            .map(|x| x.numer().abs())
            .max()
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_matrix_is_invertible() {
        let e = Matrix::zeros(0, 0);
        assert_eq!(e.inverse(Field::Rationals), Some(Matrix::zeros(0, 0)));
    }

    #[test]
    fn rank_over_f5() {
        let f = Field::Prime(5);
        let m = Matrix::from_i64(f, &[&[1, 2, 3], &[2, 4, 0]]);
        assert_eq!(m.rank(f), 2);
        let m = Matrix::from_i64(f, &[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(m.rank(f), 1);
    }

    #[test]
    fn reduction_is_canonical() {
        let f = Field::Prime(5);
        assert_eq!(f.from_i64(-1), f.from_i64(4));
        let half = Scalar::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(f.reduce(half), f.from_i64(3));
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let f = Field::Rationals;
        let m = Matrix::from_i64(f, &[&[1, 2, 3, 4], &[0, 1, 1, 1]]);
        let k = m.kernel(f);
        assert_eq!(k.cols(), 2);
        assert!(m.mul(&k, f).is_zero());
        assert_eq!(k.rank(f), 2);
    }

    #[test]
    fn inverse_round_trip() {
        let f = Field::Prime(7);
        let m = Matrix::from_i64(f, &[&[1, 2], &[3, 4]]);
        let inv = m.inverse(f).unwrap();
        assert_eq!(m.mul(&inv, f), Matrix::identity(2));
        let singular = Matrix::from_i64(f, &[&[1, 2], &[2, 4]]);
        assert!(singular.inverse(f).is_none());
    }

    #[test]
    fn solve_finds_preimage() {
        let f = Field::Rationals;
        let a = Matrix::from_i64(f, &[&[1, 1], &[0, 2]]);
        let b = Matrix::from_i64(f, &[&[3], &[4]]);
        let x = a.solve(&b, f).unwrap();
        assert_eq!(a.mul(&x, f), b);
        let a = Matrix::from_i64(f, &[&[1, 1], &[1, 1]]);
        let b = Matrix::from_i64(f, &[&[1], &[2]]);
        assert!(a.solve(&b, f).is_none());
    }

    #[test]
    fn prime_check() {
        assert!(Field::prime(5).is_ok());
        assert!(Field::prime(6).is_err());
        assert!(Field::prime(1).is_err());
    }
}
