//! Gauss-Jordan elimination to reduced row echelon form.
//!
//! Columns are pivoted in increasing order; the reduced form is unique, so
//! the dense and sparse paths produce identical output.

use std::collections::BTreeMap;

use super::matrix::{Matrix, Vector};
use super::scalar::{Field, Scalar};

/// Matrices with both dimensions at most this size use the dense path.
pub const DENSE_LIMIT: usize = 64;

#[derive(Clone, Debug)]
pub struct Reduced {
    pub field: Field,
    pub cols: usize,
    /// Nonzero rows of the RREF, ordered by pivot column.
    pub rows: Vec<BTreeMap<usize, Scalar>>,
    pub pivots: Vec<usize>,
}

impl Reduced {
    pub fn kernel_basis(&self) -> Vec<Vector> {
        let pivot_set: std::collections::BTreeSet<usize> = self.pivots.iter().copied().collect();
        (0..self.cols)
            .filter(|c| !pivot_set.contains(c))
            .map(|free| {
                let mut v = vec![self.field.zero(); self.cols];
                v[free] = self.field.one();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    if let Some(x) = row.get(&free) {
                        v[p] = -x;
                    }
                }
                v
            })
            .collect()
    }

    /// Treats column `n` as the right-hand side of a system in `n` unknowns.
    pub fn particular_solution(&self, n: usize) -> Option<Vector> {
        if self.pivots.contains(&n) {
            return None;
        }
        let mut x = vec![self.field.zero(); n];
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if let Some(v) = row.get(&n) {
                x[p] = v.clone();
            }
        }
        Some(x)
    }
}

pub fn reduce(m: &Matrix) -> Reduced {
    if m.rows() <= DENSE_LIMIT && m.cols() <= DENSE_LIMIT {
        reduce_dense(m)
    } else {
        reduce_sparse(m)
    }
}

pub fn reduce_dense(m: &Matrix) -> Reduced {
    let field = m.field();
    let (nr, nc) = m.shape();
    let mut a: Vec<Vec<Scalar>> = (0..nr).map(|i| (0..nc).map(|j| m.get(i, j)).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nc {
        if r == nr {
            break;
        }
        let Some(p) = (r..nr).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].inv().expect("nonzero pivot");
        for j in c..nc {
            a[r][j] = &a[r][j] * &inv;
        }
        for i in 0..nr {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..nc {
                    let t = &f * &a[r][j];
                    a[i][j] = &a[i][j] - &t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let rows =
        a.into_iter().take(r).map(|row| row.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect()).collect();
    Reduced { field, cols: nc, rows, pivots }
}

fn axpy(row: &mut BTreeMap<usize, Scalar>, f: &Scalar, pivot: &BTreeMap<usize, Scalar>) {
    for (j, v) in pivot {
        let t = f * v;
        let zero = match row.get_mut(j) {
            Some(x) => {
                *x = &*x - &t;
                x.is_zero()
            }
            None => {
                row.insert(*j, -&t);
                false
            }
        };
        if zero {
            row.remove(j);
        }
    }
}

pub fn reduce_sparse(m: &Matrix) -> Reduced {
    let field = m.field();
    let nc = m.cols();
    let mut by_pivot: BTreeMap<usize, BTreeMap<usize, Scalar>> = BTreeMap::new();
    for mut row in m.clone().into_rows() {
        let mut cursor = 0;
        loop {
            let hit = row.range(cursor..).find(|(k, _)| by_pivot.contains_key(k)).map(|(k, v)| (*k, v.clone()));
            let Some((k, f)) = hit else { break };
            axpy(&mut row, &f, &by_pivot[&k]);
            cursor = k + 1;
        }
        if let Some((&lead, v)) = row.iter().next() {
            let inv = v.inv().expect("nonzero leading entry");
            for x in row.values_mut() {
                *x = &*x * &inv;
            }
            by_pivot.insert(lead, row);
        }
    }
    // back substitution, highest pivot first
    let keys: Vec<usize> = by_pivot.keys().rev().copied().collect();
    for &p in &keys {
        let prow = by_pivot[&p].clone();
        for (&q, row) in by_pivot.range_mut(..p) {
            debug_assert!(q < p);
            if let Some(f) = row.get(&p).cloned() {
                axpy(row, &f, &prow);
            }
        }
    }
    let pivots = by_pivot.keys().copied().collect();
    let rows = by_pivot.into_values().collect();
    Reduced { field, cols: nc, rows, pivots }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rationals
    }

    #[test]
    fn dense_and_sparse_agree_on_small_example() {
        let m = Matrix::from_ints(q(), &[&[0, 2, 4, 1], &[1, 1, 1, 0], &[1, 3, 5, 1]]);
        let d = reduce_dense(&m);
        let s = reduce_sparse(&m);
        assert_eq!(d.pivots, s.pivots);
        assert_eq!(d.rows, s.rows);
        // third row is the sum of the first two
        assert_eq!(d.pivots, vec![0, 1]);
    }

    #[test]
    fn sparse_path_used_for_large_matrices() {
        let n = 70;
        let mut m = Matrix::zeros(q(), n, n);
        for i in 0..n {
            m.set(i, i, q().from_i64(2));
            if i + 1 < n {
                m.set(i, i + 1, q().one());
            }
        }
        assert_eq!(m.rank(), n);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(q(), n));
    }
}
