//! Compressed-row complex matrices for the auxiliary spaces.
//!
//! Auxiliary generators are band-limited, so every product stays sparse. The
//! type is deliberately small: construction, products, Kronecker products and
//! conversion to dense `nalgebra` matrices for the few places that need them.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMat {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl SparseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Duplicate entries are summed; exact zeros are dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<C64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            assert!(r < rows && c < cols, "triplet ({r},{c}) outside {rows}x{cols}");
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        let mut keep_idx = Vec::with_capacity(indices.len());
        let mut keep_val = Vec::with_capacity(data.len());
        for ((c, v), r) in indices.into_iter().zip(data).zip(row_of) {
            if v != C64::new(0.0, 0.0) {
                keep_idx.push(c);
                keep_val.push(v);
                indptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            rows,
            cols,
            indptr,
            indices: keep_idx,
            data: keep_val,
        }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                t.push((i, j, m[(i, j)]));
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
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

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[a..b].iter().copied().zip(self.data[a..b].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[a..b].binary_search(&j) {
            Ok(k) => self.data[a + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn map<F: Fn(C64) -> C64>(&self, f: F) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (i, j, f(v))).collect();
        Self::from_triplets(self.rows, self.cols, t)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols, self.rows, t)
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut t = Vec::new();
        let mut acc = vec![C64::new(0.0, 0.0); other.cols];
        let mut touched = Vec::new();
        for i in 0..self.rows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if acc[j] == C64::new(0.0, 0.0) {
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            for &j in &touched {
                t.push((i, j, acc[j]));
                acc[j] = C64::new(0.0, 0.0);
            }
            touched.clear();
        }
        Self::from_triplets(self.rows, other.cols, t)
    }

    pub fn add_scaled(&self, other: &Self, c: C64) -> Self {
        assert_eq!(self.shape(), other.shape(), "add shape mismatch");
        let t = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, v * c)));
        Self::from_triplets(self.rows, self.cols, t.collect::<Vec<_>>())
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.triplets() {
            for (k, l, b) in other.triplets() {
                t.push((i * other.rows + k, j * other.cols + l, a * b));
            }
        }
        Self::from_triplets(self.rows * other.rows, self.cols * other.cols, t)
    }

    /// `M v`
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).map(|(j, a)| a * v[j]).sum())
            .collect()
    }

    /// `vᵀ M` (row vector times matrix, no conjugation)
    pub fn vec_mul(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (i, &x) in v.iter().enumerate() {
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, a) in self.row(i) {
                out[j] += x * a;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Leading `m x m` block.
    pub fn leading(&self, m: usize) -> Self {
        let t: Vec<_> = self.triplets().filter(|&(i, j, _)| i < m && j < m).collect();
        Self::from_triplets(m.min(self.rows), m.min(self.cols), t)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && (self - &self.adjoint()).max_abs() <= tol
    }
}

impl Add for &SparseMat {
    type Output = SparseMat;
    fn add(self, rhs: &SparseMat) -> SparseMat {
        self.add_scaled(rhs, C64::new(1.0, 0.0))
    }
}

impl Sub for &SparseMat {
    type Output = SparseMat;
    fn sub(self, rhs: &SparseMat) -> SparseMat {
        self.add_scaled(rhs, C64::new(-1.0, 0.0))
    }
}

impl Mul for &SparseMat {
    type Output = SparseMat;
    fn mul(self, rhs: &SparseMat) -> SparseMat {
        self.matmul(rhs)
    }
}

impl Mul<C64> for &SparseMat {
    type Output = SparseMat;
    fn mul(self, rhs: C64) -> SparseMat {
        self.scale(rhs)
    }
}

impl Neg for &SparseMat {
    type Output = SparseMat;
    fn neg(self) -> SparseMat {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Max-abs entry of a dense complex matrix.
pub fn dense_max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let m = SparseMat::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0)), (1, 0, c(2.0, 1.0))]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), c(2.0, 1.0));
    }

    #[test]
    fn products_match_dense() {
        let a = SparseMat::from_triplets(3, 3, vec![(0, 1, c(1.0, 2.0)), (2, 0, c(-1.0, 0.5)), (1, 1, c(0.0, 3.0))]);
        let b = SparseMat::from_triplets(3, 2, vec![(1, 0, c(2.0, 0.0)), (0, 1, c(1.0, -1.0)), (2, 1, c(0.3, 0.0))]);
        let diff = (a.matmul(&b)).to_dense() - a.to_dense() * b.to_dense();
        assert!(dense_max_abs(&diff) < 1e-15);
        let k = a.kron(&b).to_dense();
        assert_eq!(k.shape(), (9, 6));
        assert_eq!(k[(2 * 3 + 1, 0)], a.get(2, 0) * b.get(1, 0));
        let v = vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)];
        let mv = a.mul_vec(&v);
        let vm = a.transpose().vec_mul(&v);
        for (x, y) in mv.iter().zip(&vm) {
            assert!((x - y).norm() < 1e-15);
        }
    }
}
