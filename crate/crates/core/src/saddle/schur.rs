use super::inner::InnerSolver;
use crate::error::{Error, Result};

/// `[A B; B^T 0] [du; dl] = [r_u; r_l]` with `B` stored as dense columns.
#[derive(Debug, Clone)]
pub struct SaddlePointSystem {
    /// Columns of `B`, each of length `n`.
    pub b: Vec<Vec<f64>>,
    pub r_u: Vec<f64>,
    pub r_lambda: Vec<f64>,
}

impl SaddlePointSystem {
    pub fn new(b: Vec<Vec<f64>>, r_u: Vec<f64>, r_lambda: Vec<f64>) -> Result<Self> {
        let n = r_u.len();
        if b.len() != r_lambda.len() {
            return Err(Error::Contract(format!(
                "B has {} columns but r_lambda has {} entries",
                b.len(),
                r_lambda.len()
            )));
        }
        if b.len() > 8 {
            return Err(Error::Contract(format!("at most 8 constraints supported, got {}", b.len())));
        }
        if b.iter().any(|c| c.len() != n) {
            return Err(Error::Contract("B column length does not match r_u".into()));
        }
        Ok(SaddlePointSystem { b, r_u, r_lambda })
    }

    pub fn n(&self) -> usize {
        self.r_u.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }
}

/// Solution of a saddle-point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub du: Vec<f64>,
    pub dlambda: Vec<f64>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `B w`.
pub(crate) fn b_times(b: &[Vec<f64>], w: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (col, wi) in b.iter().zip(w) {
        for (o, c) in out.iter_mut().zip(col) {
            *o += c * wi;
        }
    }
    out
}

/// `S w` with `S = -B^T A^{-1} B`, using one inner solve.
pub fn schur_product(inner: &InnerSolver, b: &[Vec<f64>], w: &[f64]) -> Result<Vec<f64>> {
    if w.len() != b.len() {
        return Err(Error::Contract("Schur product: w length differs from column count".into()));
    }
    let rhs = b_times(b, w, inner.dim());
    let z = inner.solve(&rhs)?;
    Ok(b.iter().map(|col| -dot(col, &z)).collect())
}

/// Direct Schur-complement solve: `S` is formed column by column, the dense
/// `m x m` system is solved for `dl`, then `du = A^{-1}(r_u - B dl)`.
/// Uses `m + 2` inner solves.
pub fn solve_saddle_direct(system: &SaddlePointSystem, inner: &InnerSolver) -> Result<SaddleSolution> {
    let (n, m) = (system.n(), system.m());
    if inner.dim() != n {
        return Err(Error::Contract("inner solver dimension differs from system".into()));
    }
    if system.b.iter().all(|c| c.iter().all(|v| *v == 0.0)) {
        if system.r_lambda.iter().any(|v| *v != 0.0) {
            return Err(Error::RankDeficient { column: 0, pivot: 0.0 });
        }
        return Ok(SaddleSolution { du: inner.solve(&system.r_u)?, dlambda: vec![0.0; m] });
    }
    let mut s = vec![vec![0.0; m]; m];
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        let col = schur_product(inner, &system.b, &e)?;
        for i in 0..m {
            s[i][j] = col[i];
        }
    }
    let w = inner.solve(&system.r_u)?;
    let rhs: Vec<f64> = system.b.iter().zip(&system.r_lambda).map(|(c, r)| r - dot(c, &w)).collect();
    let dlambda = dense_solve(s, rhs)?;
    let bdl = b_times(&system.b, &dlambda, n);
    let r: Vec<f64> = system.r_u.iter().zip(&bdl).map(|(a, b)| a - b).collect();
    let du = inner.solve(&r)?;
    Ok(SaddleSolution { du, dlambda })
}

/// Gaussian elimination with partial pivoting; a pivot below
/// `1e-12 max|S|` is reported as rank deficiency.
pub(crate) fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let m = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap_or(k);
        if !(a[p][k].abs() > 1e-12 * scale) {
            return Err(Error::RankDeficient { column: k, pivot: a[p][k] });
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..m {
            let f = a[i][k] / a[k][k];
            for j in k..m {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let s: f64 = (k + 1..m).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::SparseMatrix;
    use crate::saddle::{build_inner_solver, InnerMode};

    fn diag(n: usize, v: f64) -> InnerSolver {
        let t: Vec<_> = (0..n).map(|i| (i, i, v)).collect();
        build_inner_solver(&SparseMatrix::from_triplets(n, n, &t).unwrap(), InnerMode::Direct).unwrap()
    }

    #[test]
    fn schur_product_closed_forms() {
        let s = schur_product(&diag(3, 1.0), &[vec![1.0, 0.0, 0.0]], &[2.0]).unwrap();
        assert_eq!(s, vec![-2.0]);
        let b = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let s = schur_product(&diag(3, 2.0), &b, &[1.0, 1.0]).unwrap();
        assert_eq!(s, vec![-0.5, -0.5]);
    }

    #[test]
    fn hand_eliminated_kkt() {
        let inner = diag(2, 1.0);
        let sys = SaddlePointSystem::new(vec![vec![1.0, 0.0]], vec![1.0, 1.0], vec![0.0]).unwrap();
        let sol = solve_saddle_direct(&sys, &inner).unwrap();
        assert!((sol.dlambda[0] - 1.0).abs() < 1e-15);
        assert!(sol.du[0].abs() < 1e-15 && (sol.du[1] - 1.0).abs() < 1e-15);
        // m + 2 inner solves.
        assert_eq!(inner.solve_count(), 3);
    }

    #[test]
    fn zero_coupling_decouples() {
        let inner = diag(2, 2.0);
        let sys = SaddlePointSystem::new(vec![vec![0.0; 2]; 3], vec![2.0, 4.0], vec![0.0; 3]).unwrap();
        let sol = solve_saddle_direct(&sys, &inner).unwrap();
        assert_eq!(sol.du, vec![1.0, 2.0]);
        assert_eq!(sol.dlambda, vec![0.0; 3]);
    }

    #[test]
    fn redundant_constraints_are_rank_deficient() {
        let inner = diag(3, 1.0);
        let c = vec![1.0, 2.0, 0.0];
        let sys = SaddlePointSystem::new(vec![c.clone(), c], vec![1.0; 3], vec![0.0, 0.0]).unwrap();
        assert!(matches!(solve_saddle_direct(&sys, &inner), Err(Error::RankDeficient { .. })));
    }
}
