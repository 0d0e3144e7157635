use crate::error::{Error, Result};

/// Compressed-row matrix with a fixed sparsity pattern.
///
/// Column indices are sorted and unique within each row. Values can be
/// reset and re-accumulated without touching the pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Builds a zero matrix from per-row column lists (duplicates allowed).
    pub fn from_pattern(n_rows: usize, n_cols: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        if rows.len() != n_rows {
            return Err(Error::Contract(format!(
                "pattern has {} rows, expected {n_rows}",
                rows.len()
            )));
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            if row.last().is_some_and(|&c| c >= n_cols) {
                return Err(Error::Contract("pattern column out of range".into()));
            }
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Ok(SparseMatrix { n_rows, n_cols, row_ptr, col_idx, values, symmetric: false })
    }

    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows = vec![Vec::new(); n_rows];
        for &(i, j, _) in triplets {
            if i >= n_rows {
                return Err(Error::Contract("triplet row out of range".into()));
            }
            rows[i].push(j);
        }
        let mut m = Self::from_pattern(n_rows, n_cols, rows)?;
        for &(i, j, v) in triplets {
            m.add(i, j, v)?;
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
            symmetric: true,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        self.symmetric = false;
        &mut self.values
    }

    /// `(column, value)` pairs of one row.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].binary_search(&j).ok().map(|k| r.start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let k = self
            .position(i, j)
            .ok_or_else(|| Error::Contract(format!("entry ({i}, {j}) is outside the pattern")))?;
        self.values[k] += v;
        self.symmetric = false;
        Ok(())
    }

    /// Adds a row-major local block at the given global rows and columns.
    pub fn add_local(&mut self, rows: &[usize], cols: &[usize], block: &[f64]) -> Result<()> {
        debug_assert_eq!(block.len(), rows.len() * cols.len());
        for (a, &i) in rows.iter().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            let row_cols = &self.col_idx[r.clone()];
            for (b, &j) in cols.iter().enumerate() {
                let k = row_cols.binary_search(&j).map_err(|_| {
                    Error::Contract(format!("entry ({i}, {j}) is outside the pattern"))
                })?;
                self.values[r.start + k] += block[a * cols.len() + b];
            }
        }
        self.symmetric = false;
        Ok(())
    }

    pub fn set_zero(&mut self) {
        self.values.fill(0.0);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_rows);
        let mut y = vec![0.0; self.n_cols];
        for (i, xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                col_idx[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
            symmetric: self.symmetric,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - A^T|` over the stored entries of both.
    pub fn asymmetry(&self) -> f64 {
        if self.n_rows != self.n_cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Sets the symmetry flag after checking `|A - A^T|_max <= 1e-12 |A|_max`.
    pub fn mark_symmetric(&mut self) -> Result<()> {
        let asym = self.asymmetry();
        if asym > 1e-12 * self.max_abs() {
            return Err(Error::Contract(format!("matrix is not symmetric (|A - A^T| = {asym:e})")));
        }
        self.symmetric = true;
        Ok(())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_sorted_and_unique() {
        let mut m = SparseMatrix::from_pattern(2, 3, vec![vec![2, 0, 2], vec![1]]).unwrap();
        assert_eq!(m.col_idx(), &[0, 2, 1]);
        m.add(0, 2, 1.5).unwrap();
        m.add(0, 2, 1.0).unwrap();
        assert_eq!(m.get(0, 2), 2.5);
        assert!(m.add(1, 0, 1.0).is_err());
        assert_eq!(m.mul_vec(&[1.0, 2.0, 3.0]), vec![7.5, 0.0]);
        assert_eq!(m.transpose().to_dense(), vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![2.5, 0.0]]);
    }

    #[test]
    fn symmetry_flag() {
        let mut m =
            SparseMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)])
                .unwrap();
        m.mark_symmetric().unwrap();
        m.add(0, 1, 1e-3).unwrap();
        assert!(m.mark_symmetric().is_err());
    }
}
