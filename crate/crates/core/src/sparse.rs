//! Minimal compressed-sparse-row matrix over `Complex64`.
//!
//! Only what the cavity/atom operators and Liouvillians need: assembly from
//! triplets, products, Kronecker products, adjoints and matrix-vector
//! application. Explicit zeros are pruned on every construction path.

use ndarray::{Array2, ArrayView1, ArrayViewMut1};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Assembles a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed; entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); nrows];
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            rows[i].push((j, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut acc = ZERO;
                while k < row.len() && row[k].0 == j {
                    acc += row[k].1;
                    k += 1;
                }
                if acc != ZERO {
                    indices.push(j);
                    values.push(acc);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(dense: &Array2<Complex64>) -> Self {
        let (nrows, ncols) = dense.dim();
        Self::from_triplets(
            nrows,
            ncols,
            dense
                .indexed_iter()
                .filter(|(_, v)| **v != ZERO)
                .map(|((i, j), &v)| (i, j, v)),
        )
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.indptr[i]..self.indptr[i + 1]).map(move |k| (i, self.indices[k], self.values[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let row = self.indptr[i]..self.indptr[i + 1];
        match self.indices[row.clone()].binary_search(&j) {
            Ok(pos) => self.values[row.start + pos],
            Err(_) => ZERO,
        }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for (i, j, v) in self.iter() {
            out[[i, j]] = v;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.iter().map(|(i, j, v)| (j, i, v)),
        )
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.iter().map(|(i, j, v)| (j, i, v.conj())),
        )
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        if factor == ZERO {
            return Self::zeros(self.nrows, self.ncols);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.prune()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            (self.nrows, self.ncols),
            (other.nrows, other.ncols),
            "shape mismatch in sparse add"
        );
        Self::from_triplets(self.nrows, self.ncols, self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "shape mismatch in sparse product");
        let mut triplets = Vec::new();
        for (i, k, a) in self.iter() {
            for p in other.indptr[k]..other.indptr[k + 1] {
                triplets.push((i, other.indices[p], a * other.values[p]));
            }
        }
        Self::from_triplets(self.nrows, other.ncols, triplets)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (other.nrows, other.ncols);
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.iter() {
            for (k, l, b) in other.iter() {
                triplets.push((i * r + k, j * c + l, a * b));
            }
        }
        Self::from_triplets(self.nrows * r, self.ncols * c, triplets)
    }

    /// `y += alpha * A x`.
    pub fn mul_vec_acc(
        &self,
        alpha: Complex64,
        x: ArrayView1<'_, Complex64>,
        mut y: ArrayViewMut1<'_, Complex64>,
    ) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        match (x.as_slice(), y.as_slice_mut()) {
            (Some(xs), Some(ys)) => self.mul_slice_acc(alpha, xs, ys),
            _ => {
                let xs = x.to_vec();
                let mut ys = y.to_vec();
                self.mul_slice_acc(alpha, &xs, &mut ys);
                y.iter_mut().zip(ys).for_each(|(a, b)| *a = b);
            }
        }
    }

    fn mul_slice_acc(&self, alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        for (yi, bounds) in y.iter_mut().zip(self.indptr.windows(2)) {
            let (lo, hi) = (bounds[0], bounds[1]);
            let acc = self.indices[lo..hi]
                .iter()
                .zip(&self.values[lo..hi])
                .fold(ZERO, |acc, (&j, &v)| acc + v * x[j]);
            *yi += alpha * acc;
        }
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| {
                self.values[self.indptr[i]..self.indptr[i + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.sub(&self.adjoint())
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    fn prune(mut self) -> Self {
        if self.values.iter().all(|v| *v != ZERO) {
            return self;
        }
        let trip: Vec<_> = self.iter().collect();
        self = Self::from_triplets(self.nrows, self.ncols, trip);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![
                (0, 1, c(1.0, 0.0)),
                (0, 1, c(-1.0, 0.0)),
                (1, 0, c(2.0, 1.0)),
            ],
        );
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), c(2.0, 1.0));
        assert_eq!(m.get(0, 1), ZERO);
    }

    #[test]
    fn product_and_kron_match_dense() {
        let a = array![[c(1.0, 0.0), c(0.0, 2.0)], [c(0.0, 0.0), c(3.0, -1.0)]];
        let b = array![[c(0.5, 0.0), c(1.0, 1.0)], [c(-2.0, 0.0), c(0.0, 0.0)]];
        let (sa, sb) = (CsrMatrix::from_dense(&a), CsrMatrix::from_dense(&b));
        assert_eq!(sa.matmul(&sb).to_dense(), a.dot(&b));
        let k = sa.kron(&sb).to_dense();
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k[[i * 2 + p, j * 2 + q]], a[[i, j]] * b[[p, q]]);
                    }
                }
            }
        }
    }

    #[test]
    fn matvec_accumulates() {
        let a = array![[c(1.0, 0.0), c(2.0, 0.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
        let s = CsrMatrix::from_dense(&a);
        let x = Array1::from(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let mut y = Array1::from(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        s.mul_vec_acc(c(2.0, 0.0), x.view(), y.view_mut());
        assert_eq!(y[0], c(7.0, 0.0));
        assert_eq!(y[1], c(0.0, 2.0));
    }

    #[test]
    fn adjoint_and_norms() {
        let a = array![[c(1.0, 0.0), c(0.0, 2.0)], [c(0.0, -2.0), c(3.0, 0.0)]];
        let s = CsrMatrix::from_dense(&a);
        assert_eq!(s.hermiticity_error(), 0.0);
        assert_eq!(s.norm_inf(), 5.0);
        let t = CsrMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0))]);
        assert_eq!(t.hermiticity_error(), 1.0);
        assert_eq!(t.adjoint().get(1, 0), c(1.0, 0.0));
        assert_eq!(t.scale(ZERO).nnz(), 0);
    }
}
