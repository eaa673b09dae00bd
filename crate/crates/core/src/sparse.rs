//! Row-compressed sparse matrices and direct solves.
//!
//! Factorizations are delegated to `faer`; this module only owns storage,
//! deterministic assembly, and the conversion to faer's column format.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Accumulates `(row, col, value)` contributions. Duplicates are summed in
/// insertion order, so assembly is bitwise reproducible.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        Self { dim, entries: Vec::with_capacity(capacity) }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.dim && col < self.dim);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self, symmetric: bool) -> SparseOperator {
        // stable: equal keys keep insertion order
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len() / 2);
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len() / 2);
        let mut last = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOperator { dim: self.dim, row_ptr, col_idx, values, symmetric }
    }
}

/// Square sparse matrix in compressed-row storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Whether the matrix was assembled from a symmetric form.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `x^T M y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.matvec(y)).map(|(a, b)| a * b).sum()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// `max |M_ij - M_ji|`
    pub fn max_asymmetry(&self) -> f64 {
        (0..self.dim)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Dense copy, for small test problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    /// Principal submatrix on `keep` (sorted or not) in faer column format.
    fn to_faer(&self, keep: &[usize]) -> Result<SparseColMat<usize, f64>> {
        let mut local = vec![usize::MAX; self.dim];
        for (k, &i) in keep.iter().enumerate() {
            local[i] = k;
        }
        let mut triplets = Vec::with_capacity(self.nnz());
        for (k, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if local[j] != usize::MAX {
                    triplets.push(Triplet::new(k, local[j], v));
                }
            }
        }
        SparseColMat::try_new_from_triplets(keep.len(), keep.len(), &triplets)
            .map_err(|e| Error::SingularSubsystem(format!("{e:?}")))
    }

    /// Solves `M x = b` by sparse LU with partial pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let all: Vec<usize> = (0..self.dim).collect();
        self.solve_principal(&all, rhs)
    }

    /// Solves `M[keep, keep] x = rhs` by sparse LU.
    pub fn solve_principal(&self, keep: &[usize], rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(keep.len(), rhs.len())?;
        if keep.is_empty() {
            return Ok(Vec::new());
        }
        let a = self.to_faer(keep)?;
        let lu = a.sp_lu().map_err(|e| Error::SingularSubsystem(format!("{e:?}")))?;
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        finite(lu.solve(&b))
    }

    /// Solves `M x = b` for symmetric positive definite `M` by sparse
    /// Cholesky.
    pub fn solve_spd(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, rhs.len())?;
        if self.dim == 0 {
            return Ok(Vec::new());
        }
        let all: Vec<usize> = (0..self.dim).collect();
        let a = self.to_faer(&all)?;
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::SingularSubsystem(format!("{e:?}")))?;
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        finite(llt.solve(&b))
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

fn finite(x: Mat<f64>) -> Result<Vec<f64>> {
    let v: Vec<f64> = (0..x.nrows()).map(|i| x[(i, 0)]).collect();
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::SingularSubsystem("non-finite solution".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseOperator {
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
                b.add(i + 1, i, -1.0);
            }
        }
        b.build(true)
    }

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2);
        b.add(1, 0, 1.5);
        b.add(0, 0, 1.0);
        b.add(1, 0, 2.5);
        let m = b.build(false);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 0), 4.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.max_asymmetry(), 4.0);
    }

    #[test]
    fn lu_and_cholesky_agree() {
        let m = laplacian_1d(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let x1 = m.solve(&b).unwrap();
        let x2 = m.solve_spd(&b).unwrap();
        let r = m.matvec(&x1);
        for i in 0..50 {
            assert!((r[i] - b[i]).abs() < 1e-10);
            assert!((x1[i] - x2[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn principal_submatrix_solve() {
        let m = laplacian_1d(5);
        let x = m.solve_principal(&[0, 2, 4], &[2.0, 2.0, 2.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(m.solve_principal(&[], &[]).unwrap().is_empty());
        assert!(m.solve_principal(&[0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut b = TripletBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(0, 1, 1.0);
        b.add(1, 0, 1.0);
        b.add(1, 1, 1.0);
        assert!(b.build(true).solve(&[1.0, 0.0]).is_err());
    }
}
