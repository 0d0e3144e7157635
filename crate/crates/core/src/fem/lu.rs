use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Sparse LU factorization with partial pivoting, reusable for many
/// right-hand sides and for transposed solves.
pub struct SparseLu {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.n).finish()
    }
}

impl SparseLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::Solver("LU needs a square matrix".into()));
        }
        faer::set_global_parallelism(faer::Par::Seq);
        let triplets: Vec<Triplet<usize, usize, f64>> = (0..n)
            .flat_map(|i| a.row(i).map(move |(j, v)| Triplet::new(i, j, v)))
            .collect();
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Solver(format!("sparse matrix construction failed: {e:?}")))?;
        let lu = csc
            .sp_lu()
            .map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
        Ok(SparseLu { n, lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_impl(b, false)
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_impl(b, true)
    }

    fn solve_impl(&self, b: &[f64], transpose: bool) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Contract(format!(
                "right-hand side has {} entries, expected {}",
                b.len(),
                self.n
            )));
        }
        let mut x = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        if transpose {
            self.lu.solve_transpose_in_place(x.as_mut());
        } else {
            self.lu.solve_in_place(x.as_mut());
        }
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("LU solve produced non-finite values (singular matrix)".into()));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_nonsymmetric_system() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 2.0), (1, 1, 5.0), (1, 2, 1.0), (2, 2, 3.0), (2, 0, 1.0)],
        )
        .unwrap();
        let lu = SparseLu::factor(&a).unwrap();
        let x = vec![1.0, -2.0, 0.5];
        let b = a.mul_vec(&x);
        let y = lu.solve(&b).unwrap();
        let bt = a.transpose_mul_vec(&x);
        let z = lu.solve_transpose(&bt).unwrap();
        for i in 0..3 {
            assert!((y[i] - x[i]).abs() < 1e-14 && (z[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_row_is_singular() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 0.0), (1, 0, 0.0)]).unwrap();
        let r = SparseLu::factor(&a).and_then(|lu| lu.solve(&[1.0, 1.0]));
        assert!(matches!(r, Err(Error::Solver(_))));
    }
}
