use super::givens::givens;
use super::inner::InnerSolver;
use super::schur::{b_times, dot, schur_product, SaddleSolution};
use crate::error::{Error, Result};

/// Outcome of a GMRES run together with the Arnoldi data.
#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `|beta_{j+1}|` after each iteration, preceded by the initial residual.
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Orthonormal Krylov basis, one vector per entry.
    pub basis: Vec<Vec<f64>>,
    /// Unrotated Hessenberg columns; column `j` has `j + 2` entries.
    pub hessenberg: Vec<Vec<f64>>,
}

/// GMRES for `K y = b` with two-pass classical Gram-Schmidt and Givens QR.
/// Stops when `|beta_{j+1}| <= tol |b|` or after `max_iters` iterations.
pub fn gmres<F>(mut apply: F, b: &[f64], y0: &[f64], max_iters: usize, tol: f64) -> Result<GmresOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let m = b.len();
    if y0.len() != m {
        return Err(Error::Contract("initial guess length differs from right-hand side".into()));
    }
    let bnorm = dot(b, b).sqrt();
    let ky0 = apply(y0)?;
    let r0: Vec<f64> = b.iter().zip(&ky0).map(|(b, k)| b - k).collect();
    let beta = dot(&r0, &r0).sqrt();
    let mut out = GmresOutcome {
        solution: y0.to_vec(),
        iterations: 0,
        residuals: vec![beta],
        converged: beta <= tol * bnorm || beta == 0.0,
        basis: Vec::new(),
        hessenberg: Vec::new(),
    };
    if out.converged {
        return Ok(out);
    }
    out.basis.push(r0.iter().map(|v| v / beta).collect());
    let mut g = vec![beta];
    let mut rotations: Vec<(f64, f64)> = Vec::new();
    let mut rotated: Vec<Vec<f64>> = Vec::new();
    let mut breakdown = false;

    while out.iterations < max_iters {
        let j = out.iterations;
        let mut v = apply(&out.basis[j])?;
        let mut h = vec![0.0; j + 2];
        for _pass in 0..2 {
            let coeffs: Vec<f64> = out.basis.iter().map(|q| dot(q, &v)).collect();
            for (q, c) in out.basis.iter().zip(&coeffs) {
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
            for (hi, c) in h.iter_mut().zip(&coeffs) {
                *hi += c;
            }
        }
        let vnorm = dot(&v, &v).sqrt();
        h[j + 1] = vnorm;
        out.hessenberg.push(h.clone());

        for (k, &(c, s)) in rotations.iter().enumerate() {
            let (a, b) = (h[k], h[k + 1]);
            h[k] = c * a + s * b;
            h[k + 1] = -s * a + c * b;
        }
        let (c, s, r) = givens(h[j], h[j + 1])?;
        h[j] = r;
        h[j + 1] = 0.0;
        rotations.push((c, s));
        g.push(-s * g[j]);
        g[j] *= c;
        rotated.push(h);
        out.iterations += 1;
        let res = g[j + 1].abs();
        out.residuals.push(res);

        // Lucky breakdown: the Krylov space is invariant.
        breakdown = vnorm <= 1e-14 * r.max(f64::MIN_POSITIVE) || out.iterations == m;
        if res <= tol * bnorm || breakdown {
            break;
        }
        out.basis.push(v.iter().map(|x| x / vnorm).collect());
    }

    let k = out.iterations;
    let mut z = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|l| rotated[l][i] * z[l]).sum();
        z[i] = (g[i] - s) / rotated[i][i];
    }
    for (q, zi) in out.basis.iter().zip(&z) {
        for (y, qi) in out.solution.iter_mut().zip(q) {
            *y += zi * qi;
        }
    }
    out.converged = out.residuals[k] <= tol * bnorm || (breakdown && out.residuals[k] <= 1e-10 * bnorm);
    Ok(out)
}

/// Saddle-point solve by GMRES on the Schur complement.
#[derive(Debug, Clone)]
pub struct SchurGmresResult {
    pub solution: SaddleSolution,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub outcome: GmresOutcome,
}

/// `w = A^{-1} r_u`, `b = r_l - B^T w`; GMRES on `S dl = b` from `y0`; then
/// `du = A^{-1}(r_u - B dl)`.
pub fn schur_gmres(
    inner: &InnerSolver,
    b_cols: &[Vec<f64>],
    r_u: &[f64],
    r_lambda: &[f64],
    y0: &[f64],
    max_iters: usize,
    tol: f64,
) -> Result<SchurGmresResult> {
    let n = inner.dim();
    if r_u.len() != n || r_lambda.len() != b_cols.len() {
        return Err(Error::Contract("Schur GMRES: inconsistent dimensions".into()));
    }
    let w = inner.solve(r_u)?;
    let rhs: Vec<f64> = b_cols.iter().zip(r_lambda).map(|(c, r)| r - dot(c, &w)).collect();
    let outcome = gmres(|x| schur_product(inner, b_cols, x), &rhs, y0, max_iters, tol)?;
    let dlambda = outcome.solution.clone();
    let bdl = b_times(b_cols, &dlambda, n);
    let r: Vec<f64> = r_u.iter().zip(&bdl).map(|(a, b)| a - b).collect();
    let du = inner.solve(&r)?;
    Ok(SchurGmresResult {
        solution: SaddleSolution { du, dlambda },
        iterations: outcome.iterations,
        residual: *outcome.residuals.last().unwrap_or(&0.0),
        converged: outcome.converged,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::SparseMatrix;
    use crate::saddle::{build_inner_solver, solve_saddle_direct, InnerMode, SaddlePointSystem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spd(n: usize, rng: &mut ChaCha8Rng) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + rng.random::<f64>()));
            if i + 1 < n {
                let v = -rng.random::<f64>();
                t.push((i, i + 1, v));
                t.push((i + 1, i, v));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    fn columns(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..m).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn single_constraint_one_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inner = build_inner_solver(&spd(20, &mut rng), InnerMode::Direct).unwrap();
        let b = columns(20, 1, &mut rng);
        let r_u: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let res = schur_gmres(&inner, &b, &r_u, &[0.3], &[0.0], 10, 1e-12).unwrap();
        assert_eq!(res.iterations, 1);
        assert!(res.converged);
    }

    #[test]
    fn four_constraints_match_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inner = build_inner_solver(&spd(40, &mut rng), InnerMode::Direct).unwrap();
        let b = columns(40, 4, &mut rng);
        let r_u: Vec<f64> = (0..40).map(|_| rng.random()).collect();
        let r_l = vec![0.1, -0.2, 0.3, 0.0];
        let res = schur_gmres(&inner, &b, &r_u, &r_l, &[0.0; 4], 10, 1e-12).unwrap();
        assert!(res.iterations <= 4 && res.converged);
        let sys = SaddlePointSystem::new(b, r_u, r_l).unwrap();
        let direct = solve_saddle_direct(&sys, &inner).unwrap();
        for (a, b) in res.solution.dlambda.iter().zip(&direct.dlambda) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in res.solution.du.iter().zip(&direct.du) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn exact_warm_start_takes_no_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inner = build_inner_solver(&spd(10, &mut rng), InnerMode::Direct).unwrap();
        let b = columns(10, 3, &mut rng);
        let r_u = vec![1.0; 10];
        let r_l = vec![0.5, 0.0, -0.5];
        let sys = SaddlePointSystem::new(b.clone(), r_u.clone(), r_l.clone()).unwrap();
        let direct = solve_saddle_direct(&sys, &inner).unwrap();
        let res = schur_gmres(&inner, &b, &r_u, &r_l, &direct.dlambda, 10, 1e-8).unwrap();
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn arnoldi_relation_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let k = 8;
        let a: Vec<Vec<f64>> = (0..k).map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let apply = |x: &[f64]| Ok(a.iter().map(|row| dot(row, x)).collect::<Vec<f64>>());
        let b: Vec<f64> = (0..k).map(|_| rng.random()).collect();
        let out = gmres(apply, &b, &vec![0.0; k], 5, 1e-30).unwrap();
        assert_eq!(out.iterations, 5);
        // S Q_j = Q_{j+1} Hbar_j needs q_{j+1}, which is stored because no
        // breakdown happened before the last iteration.
        for j in 0..out.iterations.min(out.basis.len() - 1) {
            let sq = apply(&out.basis[j]).unwrap();
            for i in 0..k {
                let qh: f64 = (0..=j + 1).map(|l| out.basis[l][i] * out.hessenberg[j][l]).sum();
                assert!((sq[i] - qh).abs() < 1e-12);
            }
        }
        for p in &out.basis {
            for q in &out.basis {
                let d = dot(p, q);
                let expect = if std::ptr::eq(p, q) { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12);
            }
        }
        assert!(out.residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)));
    }
}
