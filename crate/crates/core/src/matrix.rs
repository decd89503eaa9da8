//! Packed storage for symmetric `n x n` matrices.
//!
//! Only the upper triangle (diagonal included) is stored, row by row:
//! `(0,0), (0,1), ..., (0,n-1), (1,1), (1,2), ...`. This is also the order in
//! which Bernoulli edges are sampled, so a packed index doubles as the RNG
//! consumption order.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of packed entries for an `n x n` symmetric matrix.
pub const fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Packed offset of `(i, j)` with `i <= j`.
#[inline]
pub const fn packed_index(n: usize, i: usize, j: usize) -> usize {
    // rows 0..i contribute n + (n-1) + ... + (n-i+1) entries
    i * (2 * n + 1 - i) / 2 + (j - i)
}

/// Multiplicity of each packed entry in the full matrix: 1 on the diagonal, 2 off it.
///
/// `sum_p mult[p] * a[p] * b[p]` is the Frobenius inner product of the full matrices.
pub fn multiplicities(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(packed_len(n));
    for i in 0..n {
        out.push(1.0);
        out.extend(std::iter::repeat_n(2.0, n - i - 1));
    }
    out
}

/// Iterator over `(i, j)` pairs in packed order.
pub fn packed_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i..n).map(move |j| (i, j)))
}

/// Frobenius inner product of two packed symmetric matrices of the same order.
pub fn packed_inner(mult: &[f64], a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(a.len(), mult.len());
    // four independent accumulators; keeps rounding error growth at O(len / 4)
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let base = 4 * c;
        for l in 0..4 {
            let p = base + l;
            acc[l] += mult[p] * a[p] * b[p];
        }
    }
    let mut tail = 0.0;
    for p in 4 * chunks..a.len() {
        tail += mult[p] * a[p] * b[p];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// A real symmetric matrix in packed upper-triangular storage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; packed_len(n)],
        }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            n,
            data: vec![value; packed_len(n)],
        }
    }

    /// Wraps packed data; `data.len()` must equal `packed_len(n)`.
    pub fn from_packed(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != packed_len(n) {
            return Err(Error::DimensionMismatch(format!(
                "packed data of length {} does not describe a {n}x{n} symmetric matrix",
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    /// Builds from a function of `(i, j)` evaluated for `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let data = packed_pairs(n).map(|(i, j)| f(i, j)).collect();
        Self { n, data }
    }

    /// Builds from dense rows, checking symmetry to within `tol`.
    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        check_symmetric(n, |i, j| rows[i][j], tol)?;
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// Builds from a dense nalgebra matrix, checking symmetry to within `tol`.
    pub fn from_dense(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        check_symmetric(n, |i, j| m[(i, j)], tol)?;
        Ok(Self::from_fn(n, |i, j| m[(i, j)]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    pub fn packed_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_packed(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.data[packed_index(self.n, a, b)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.data[packed_index(self.n, a, b)] = value;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Frobenius inner product `sum_ij a_ij b_ij`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(
            self.n, other.n,
            "inner product of matrices of different order"
        );
        packed_inner(&multiplicities(self.n), &self.data, &other.data)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    /// Entrywise maximum absolute value.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn zero_diagonal(&mut self) {
        for i in 0..self.n {
            self.set(i, i, 0.0);
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

fn check_symmetric(n: usize, at: impl Fn(usize, usize) -> f64, tol: f64) -> Result<()> {
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (at(i, j) - at(j, i)).abs();
            if !(gap <= tol) {
                return Err(Error::Asymmetric {
                    row: i,
                    col: j,
                    gap,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_index_matches_enumeration() {
        for n in 0..9 {
            for (p, (i, j)) in packed_pairs(n).enumerate() {
                assert_eq!(packed_index(n, i, j), p, "n={n} ({i},{j})");
            }
            assert_eq!(packed_pairs(n).count(), packed_len(n));
        }
    }

    #[test]
    fn inner_matches_dense() {
        let a = SymMatrix::from_fn(5, |i, j| (i * 7 + j * 3) as f64 * 0.1);
        let b = SymMatrix::from_fn(5, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let (da, db) = (a.to_dense(), b.to_dense());
        let dense: f64 = da.component_mul(&db).sum();
        assert!((a.inner(&b) - dense).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_rows_rejected() {
        let rows = vec![vec![0.0, 1.0], vec![0.5, 0.0]];
        assert!(matches!(
            SymMatrix::from_rows(&rows, 1e-12),
            Err(Error::Asymmetric { .. })
        ));
    }
}
