use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::fem::{SparseLu, SparseMatrix};

/// How systems with the (1,1) block are solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerMode {
    /// One sparse LU factorization reused by every solve.
    Direct,
    /// Conjugate gradients to the given relative residual.
    Iterative { tol: f64 },
}

#[derive(Debug)]
enum Backend {
    Direct(SparseLu),
    Iterative { matrix: SparseMatrix, tol: f64 },
}

/// Solver for `A z = b`; counts the solves it performs.
#[derive(Debug)]
pub struct InnerSolver {
    backend: Backend,
    dim: usize,
    solves: AtomicUsize,
}

pub fn build_inner_solver(a: &SparseMatrix, mode: InnerMode) -> Result<InnerSolver> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::Contract("inner solver needs a square matrix".into()));
    }
    let backend = match mode {
        InnerMode::Direct => Backend::Direct(SparseLu::factor(a)?),
        InnerMode::Iterative { tol } => {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::Parameter(format!("inner tolerance must be in (0, 1), got {tol}")));
            }
            Backend::Iterative { matrix: a.clone(), tol }
        }
    };
    Ok(InnerSolver { backend, dim: a.n_rows(), solves: AtomicUsize::new(0) })
}

impl InnerSolver {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of calls to [`Self::solve`] so far.
    pub fn solve_count(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim {
            return Err(Error::Contract(format!(
                "right-hand side has {} entries, expected {}",
                b.len(),
                self.dim
            )));
        }
        self.solves.fetch_add(1, Ordering::Relaxed);
        match &self.backend {
            Backend::Direct(lu) => lu.solve(b),
            Backend::Iterative { matrix, tol } => conjugate_gradient(matrix, b, *tol, 10 * self.dim + 100),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn conjugate_gradient(a: &SparseMatrix, b: &[f64], tol: f64, max_iters: usize) -> Result<Vec<f64>> {
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; b.len()];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..max_iters {
        if rr.sqrt() <= tol * bnorm {
            return Ok(x);
        }
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver(format!("CG breakdown: p^T A p = {pap:e}")));
        }
        let alpha = rr / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
    }
    if rr.sqrt() <= tol * bnorm {
        return Ok(x);
    }
    Err(Error::NonConvergence {
        what: "conjugate gradients".into(),
        iterations: max_iters,
        residual: rr.sqrt() / bnorm,
    })
}
