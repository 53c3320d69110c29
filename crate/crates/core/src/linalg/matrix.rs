use std::collections::BTreeMap;
use std::fmt;

use super::elim;
use super::scalar::{Field, Scalar};
use crate::error::{Error, Result};

/// A column vector.
pub type Vector = Vec<Scalar>;

/// Sparse matrix over an exact field. Absent entries are zero; stored
/// entries are never zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, Scalar>>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix { field, rows, cols, data: vec![BTreeMap::new(); rows] }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn scalar(field: Field, n: usize, s: &Scalar) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, s.clone());
        }
        m
    }

    /// Builds a matrix from small integer rows. All rows must have the same
    /// length; an empty slice gives a 0x0 matrix.
    pub fn from_ints(field: Field, rows: &[&[i64]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Matrix::zeros(field, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged integer rows");
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, field.from_i64(v));
            }
        }
        m
    }

    pub fn from_rows(field: Field, rows: usize, cols: usize, entries: Vec<Vec<Scalar>>) -> Result<Matrix> {
        if entries.len() != rows || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!("expected {rows}x{cols} entries")));
        }
        let mut m = Matrix::zeros(field, rows, cols);
        for (i, r) in entries.into_iter().enumerate() {
            for (j, v) in r.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn from_columns(field: Field, rows: usize, columns: &[Vector]) -> Matrix {
        let mut m = Matrix::zeros(field, rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        self.data[i].get(&j).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        if v.is_zero() {
            self.data[i].remove(&j);
        } else {
            self.data[i].insert(j, v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Scalar) {
        let cur = self.get(i, j);
        self.set(i, j, &cur + v);
    }

    pub fn row(&self, i: usize) -> &BTreeMap<usize, Scalar> {
        &self.data[i]
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.data.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |(j, v)| (i, *j, v)))
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for (i, j, v) in self.entries() {
            t.data[j].insert(i, v.clone());
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.rows, rhs.cols);
        for (i, row) in self.data.iter().enumerate() {
            let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (k, a) in row {
                for (j, b) in &rhs.data[*k] {
                    let t = a * b;
                    match acc.get_mut(j) {
                        Some(s) => *s = &*s + &t,
                        None => {
                            acc.insert(*j, t);
                        }
                    }
                }
            }
            acc.retain(|_, v| !v.is_zero());
            out.data[i] = acc;
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vector> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} to a vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(self.data.iter().map(|row| row.iter().fold(self.field.zero(), |acc, (j, a)| &acc + &(a * &v[*j]))).collect())
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = self.clone();
        for (i, j, v) in rhs.entries() {
            out.add_to(i, j, v);
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Matrix {
        self.scale(&-self.field.one())
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.rows, self.cols);
        if s.is_zero() {
            return out;
        }
        for (i, j, v) in self.entries() {
            out.data[i].insert(j, v * s);
        }
        out
    }

    /// Copies `block` into this matrix with its top-left corner at `(r0, c0)`.
    pub fn place(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for (i, j, v) in block.entries() {
            self.set(r0 + i, c0 + j, v.clone());
        }
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let mut out = Matrix::zeros(self.field, rows, cols);
        for i in 0..rows {
            for (j, v) in self.data[r0 + i].range(c0..c0 + cols) {
                out.data[i].insert(j - c0, v.clone());
            }
        }
        out
    }

    pub fn hstack(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch("hstack row count".into()));
        }
        let mut out = Matrix::zeros(self.field, self.rows, self.cols + rhs.cols);
        out.place(0, 0, self);
        out.place(0, self.cols, rhs);
        Ok(out)
    }

    pub fn vstack(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("vstack column count".into()));
        }
        let mut out = Matrix::zeros(self.field, self.rows + rhs.rows, self.cols);
        out.place(0, 0, self);
        out.place(self.rows, 0, rhs);
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        elim::reduce(self).pivots.len()
    }

    /// Basis of the null space, one vector per free column in increasing
    /// column order.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        let red = elim::reduce(self);
        red.kernel_basis()
    }

    /// Some `x` with `self * x = b`, or `None` when the system is
    /// inconsistent. Free variables are set to zero, so the witness is a
    /// deterministic function of the input.
    pub fn solve(&self, b: &[Scalar]) -> Result<Option<Vector>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {} but matrix has {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut aug = Matrix::zeros(self.field, self.rows, self.cols + 1);
        aug.place(0, 0, self);
        for (i, v) in b.iter().enumerate() {
            aug.set(i, self.cols, v.clone());
        }
        let red = elim::reduce(&aug);
        Ok(red.particular_solution(self.cols))
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Matrix::identity(self.field, n)).ok()?;
        let red = elim::reduce(&aug);
        if red.pivots.len() < n || red.pivots.iter().take(n).enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        let mut inv = Matrix::zeros(self.field, n, n);
        for (r, row) in red.rows.iter().enumerate().take(n) {
            for (j, v) in row.range(n..) {
                inv.set(r, j - n, v.clone());
            }
        }
        Some(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub(crate) fn into_rows(self) -> Vec<BTreeMap<usize, Scalar>> {
        self.data
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}x{} over {}]", self.rows, self.cols, self.field)?;
        if self.rows * self.cols <= 64 {
            write!(f, " [")?;
            for i in 0..self.rows {
                if i > 0 {
                    write!(f, "; ")?;
                }
                let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
                write!(f, "{}", row.join(" "))?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}
