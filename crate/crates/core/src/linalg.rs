//! Exact dense linear algebra over a prime field `F_p`.
//!
//! Every other module bottoms out here: homology bases, limits, colimits,
//! quotients and hom-spaces are all kernels, ranks and solves of small dense
//! matrices. Elimination always pivots on the first nonzero entry, so results
//! are deterministic for a given input.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime modulus. Arithmetic helpers live here so that matrices only carry
/// the modulus around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeField(u32);

impl PrimeField {
    pub const F2: PrimeField = PrimeField(2);

    pub fn new(p: u32) -> Result<Self> {
        if !(2..1 << 31).contains(&p) || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField(p))
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn reduce(self, v: i64) -> u32 {
        v.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.0 as u64 - b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    pub fn pow(self, mut a: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.0), "inverse of zero in F_{}", self.0);
        self.pow(a, self.0 as u64 - 2)
    }

    pub fn element(self, v: i64) -> FieldElement {
        FieldElement {
            residue: self.reduce(v),
            field: self,
        }
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField::F2
    }
}

impl TryFrom<u32> for PrimeField {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u32 {
    fn from(f: PrimeField) -> u32 {
        f.0
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.0)
    }
}

fn is_prime(p: u32) -> bool {
    if p < 4 {
        return p >= 2;
    }
    if p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// A single scalar tagged with its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    residue: u32,
    field: PrimeField,
}

impl FieldElement {
    pub fn residue(self) -> u32 {
        self.residue
    }

    pub fn field(self) -> PrimeField {
        self.field
    }

    fn check(self, other: FieldElement) {
        assert_eq!(self.field, other.field, "mixed moduli in one computation");
    }

    pub fn is_zero(self) -> bool {
        self.residue == 0
    }

    pub fn inverse(self) -> Option<FieldElement> {
        (!self.is_zero()).then(|| FieldElement {
            residue: self.field.inv(self.residue),
            field: self.field,
        })
    }
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        self.check(rhs);
        FieldElement {
            residue: self.field.add(self.residue, rhs.residue),
            field: self.field,
        }
    }
}

impl std::ops::Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        self.check(rhs);
        FieldElement {
            residue: self.field.sub(self.residue, rhs.residue),
            field: self.field,
        }
    }
}

impl std::ops::Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        self.check(rhs);
        FieldElement {
            residue: self.field.mul(self.residue, rhs.residue),
            field: self.field,
        }
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        FieldElement {
            residue: self.field.neg(self.residue),
            field: self.field,
        }
    }
}

// ============================================================================
// Matrix
// ============================================================================

/// Row-major dense matrix over a prime field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}x{} over {}]", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            write!(f, "\n  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Result of row reduction: the reduced row echelon form and its pivot columns.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub reduced: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from signed integer rows, reducing every entry mod p.
    /// All rows must have the same length; `cols` is needed for the 0-row case.
    pub fn from_rows<R: AsRef<[i64]>>(field: PrimeField, cols: usize, rows: &[R]) -> Self {
        let mut m = Self::zeros(field, rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged matrix rows");
            for (c, &v) in row.iter().enumerate() {
                m.data[r * cols + c] = field.reduce(v);
            }
        }
        m
    }

    pub fn from_fn(
        field: PrimeField,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> u32,
    ) -> Self {
        let mut m = Self::zeros(field, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c) % field.modulus();
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors (each of length `rows`).
    pub fn from_columns(field: PrimeField, rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(field, rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (r, &v) in col.iter().enumerate() {
                m.data[r * m.cols + c] = v % field.modulus();
            }
        }
        m
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.field.modulus();
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|r| (0..self.cols).all(|c| self.get(r, c) == u32::from(r == c)))
    }

    fn same_field(&self, other: &Matrix) {
        assert_eq!(
            self.field, other.field,
            "mixed moduli in one computation"
        );
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        self.same_field(other);
        assert_eq!(
            self.cols, other.rows,
            "shape mismatch in product: {:?} * {:?}",
            self.shape(),
            other.shape()
        );
        let p = self.field.modulus() as u64;
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (slot, &b) in acc.iter_mut().zip(orow) {
                    *slot = (*slot + a * b as u64) % p;
                }
            }
            for (c, &v) in acc.iter().enumerate() {
                out.data[r * other.cols + c] = v as u32;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len(), "shape mismatch in matrix-vector product");
        (0..self.rows)
            .map(|r| {
                self.row(r).iter().zip(v).fold(0u32, |acc, (&a, &b)| {
                    self.field.add(acc, self.field.mul(a, b))
                })
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.same_field(other);
        assert_eq!(self.shape(), other.shape(), "shape mismatch in sum");
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a = self.field.add(*a, b);
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.same_field(other);
        assert_eq!(self.shape(), other.shape(), "shape mismatch in difference");
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a = self.field.sub(*a, b);
        }
        out
    }

    pub fn scale(&self, s: u32) -> Matrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = self.field.mul(*a, s);
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// `[self | other]`
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        self.same_field(other);
        assert_eq!(self.rows, other.rows, "row mismatch in hstack");
        Matrix::from_fn(self.field, self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                other.get(r, c - self.cols)
            }
        })
    }

    /// `[self ; other]`
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        self.same_field(other);
        assert_eq!(self.cols, other.cols, "column mismatch in vstack");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix {
            field: self.field,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn select_rows(&self, range: std::ops::Range<usize>) -> Matrix {
        Matrix::from_fn(self.field, range.len(), self.cols, |r, c| {
            self.get(range.start + r, c)
        })
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        Matrix::from_fn(self.field, self.rows, cols.len(), |r, c| self.get(r, cols[c]))
    }

    /// Reduced row echelon form with first-nonzero pivoting.
    pub fn echelon(&self) -> Echelon {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(piv) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            m.swap_rows(row, piv);
            let inv = f.inv(m.get(row, col));
            for c in col..m.cols {
                let v = f.mul(m.get(row, c), inv);
                m.data[row * m.cols + c] = v;
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor != 0 {
                    m.axpy_row(r, row, f.neg(factor), col);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// row[dst] += s * row[src], starting at column `from`.
    fn axpy_row(&mut self, dst: usize, src: usize, s: u32, from: usize) {
        let f = self.field;
        for c in from..self.cols {
            let v = self.data[src * self.cols + c];
            if v != 0 {
                let d = &mut self.data[dst * self.cols + c];
                *d = f.add(*d, f.mul(s, v));
            }
        }
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        // eliminate on the smaller side
        if self.rows > self.cols {
            return self.transpose().echelon().pivots.len();
        }
        self.echelon().pivots.len()
    }

    /// Columns form a basis of the null space; shape is `cols x (cols - rank)`.
    pub fn kernel_basis(&self) -> Matrix {
        let f = self.field;
        let Echelon { reduced, pivots } = self.echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            basis.set(fc, k, 1);
            for (r, &pc) in pivots.iter().enumerate() {
                basis.set(pc, k, f.neg(reduced.get(r, fc)));
            }
        }
        basis
    }

    /// Some `x` with `self * x = b`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        let rhs = Matrix::from_columns(self.field, self.rows, &[b.to_vec()]);
        self.solve_matrix(&rhs).map(|x| x.column(0))
    }

    /// Some `X` with `self * X = rhs`, or `None` if any column is inconsistent.
    pub fn solve_matrix(&self, rhs: &Matrix) -> Option<Matrix> {
        self.same_field(rhs);
        assert_eq!(rhs.rows, self.rows, "right-hand side row mismatch");
        let aug = self.hstack(rhs);
        let Echelon { reduced, pivots } = aug.echelon();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Matrix::zeros(self.field, self.cols, rhs.cols);
        for (r, &pc) in pivots.iter().enumerate() {
            for k in 0..rhs.cols {
                x.set(pc, k, reduced.get(r, self.cols + k));
            }
        }
        Some(x)
    }

    /// Indices of a maximal set of linearly independent columns (first-come).
    pub fn independent_columns(&self) -> Vec<usize> {
        self.echelon().pivots
    }

    /// Matrix made of a basis of the column space.
    pub fn column_space(&self) -> Matrix {
        self.select_cols(&self.independent_columns())
    }

    /// A right inverse `S` (`self * S = I`) of a surjective matrix.
    pub fn right_inverse(&self) -> Option<Matrix> {
        self.solve_matrix(&Matrix::identity(self.field, self.rows))
    }
}

/// Surjection `F^ambient -> F^(ambient - dim span)` whose kernel is exactly the
/// column span of `subspace`.
pub fn quotient_map(field: PrimeField, ambient: usize, subspace: &Matrix) -> Matrix {
    assert_eq!(subspace.rows(), ambient, "subspace generators have wrong length");
    assert_eq!(subspace.field(), field, "mixed moduli in one computation");
    if subspace.cols() == 0 {
        return Matrix::identity(field, ambient);
    }
    // rows of Q span the annihilator of the subspace; ann(ann(S)) = S
    subspace.transpose().kernel_basis().transpose()
}
