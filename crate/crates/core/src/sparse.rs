//! Compressed sparse row matrices.

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return invalid(format!("entry ({i},{j}) outside a {nrows}x{ncols} matrix"));
            }
            t.push((i, j, v));
        }
        // stable sort keeps input order among duplicates, so summation is reproducible
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values = Vec::with_capacity(t.len());
        let mut k = 0;
        while k < t.len() {
            let (i, j, mut v) = t[k];
            k += 1;
            while k < t.len() && t[k].0 == i && t[k].1 == j {
                v += t[k].2;
                k += 1;
            }
            if v != 0.0 {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Dense row-major input; zeros are skipped.
    pub fn from_dense(nrows: usize, ncols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != nrows * ncols {
            return invalid("dense data length does not match shape");
        }
        let t: Vec<(usize, usize, f64)> = (0..nrows)
            .flat_map(|i| (0..ncols).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, data[i * ncols + j]))
            .filter(|e| e.2 != 0.0)
            .collect();
        Self::from_triplets(nrows, ncols, &t)
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

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// `(col, value)` pairs of one row in column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, accumulating each row in column order from `0.0`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return invalid(format!("vector of length {} for {} columns", x.len(), self.ncols));
        }
        Ok((0..self.nrows)
            .map(|i| self.row(i).fold(0.0, |acc, (j, v)| acc + v * x[j]))
            .collect())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for (i, j, v) in self.triplets() {
            d[i * self.ncols + j] = v;
        }
        d
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && self.triplets().iter().all(|&(i, j, v)| self.get(j, i) == v)
    }

    /// Rows with no stored entry.
    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.nrows).filter(|&i| self.indptr[i] == self.indptr[i + 1]).collect()
    }

    /// Columns with no stored entry.
    pub fn empty_cols(&self) -> Vec<usize> {
        let mut seen = vec![false; self.ncols];
        for &j in &self.indices {
            seen[j] = true;
        }
        (0..self.ncols).filter(|&j| !seen[j]).collect()
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 5.0), (1, 0, -5.0), (1, 1, 4.0)])
            .unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert!(CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn matvec_and_dense_round_trip() {
        let d = [2.0, 0.0, 1.0, 0.0, 3.0, 0.0, 1.0, 0.0, 4.0];
        let a = CsrMatrix::from_dense(3, 3, &d).unwrap();
        assert_eq!(a.to_dense(), d.to_vec());
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]).unwrap(), vec![3.0, 3.0, 5.0]);
        assert!(a.is_symmetric());
        assert_eq!(a.diagonal(), vec![2.0, 3.0, 4.0]);
        assert!(a.matvec(&[1.0]).is_err());
    }

    #[test]
    fn empty_rows_and_cols() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 2, 1.0)]).unwrap();
        assert_eq!(a.empty_rows(), vec![1, 2]);
        assert_eq!(a.empty_cols(), vec![0, 1]);
        assert_eq!(CsrMatrix::identity(3).nnz(), 3);
    }
}
