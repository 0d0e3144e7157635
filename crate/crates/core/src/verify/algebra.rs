use nalgebra::{DMatrix, DVector, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{rel_err, timed, Check, SuiteReport};
use crate::descent::det_expansion_coeffs;
use crate::error::{Error, Result};
use crate::fem::{assemble_operator, FunctionSpace, SpaceKind, SparseMatrix};
use crate::mesh::{rectangle_mesh, RectangleMarkers};
use crate::saddle::{
    build_inner_solver, givens, gmres, schur_gmres, solve_saddle_direct, InnerMode, SaddlePointSystem,
};

/// P1 stiffness plus mass on a rectangle grid with `(nx+1)(ny+1)` nodes.
fn fe_matrix(nx: usize, ny: usize) -> Result<SparseMatrix> {
    let mesh = rectangle_mesh((0.0, 1.0), (0.0, 1.0), nx, ny, RectangleMarkers::default())?;
    let space = FunctionSpace::new(SpaceKind::P1Scalar, &mesh);
    assemble_operator(&mesh, &space, &space, |e, blk| {
        let g = e.geometry.barycentric_gradients();
        let area = e.geometry.area();
        for a in 0..3 {
            for b in 0..3 {
                let mass = if a == b { area / 6.0 } else { area / 12.0 };
                blk[3 * a + b] = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]) + mass;
            }
        }
        Ok(())
    })
}

/// Direct and GMRES Schur solves against a dense LU of the full KKT matrix.
pub fn saddle_suite(seed: u64) -> Result<SuiteReport> {
    timed("saddle", 10.0, |checks| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut worst_direct, mut worst_gmres, mut worst_iters) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..20 {
            // Grid sizes giving 100..=500 unknowns.
            let (nx, ny) = loop {
                let nx = rng.random_range(9..=24usize);
                let ny = rng.random_range(9..=24usize);
                if (100..=500).contains(&((nx + 1) * (ny + 1))) {
                    break (nx, ny);
                }
            };
            let a = fe_matrix(nx, ny)?;
            let n = a.n_rows();
            let m = rng.random_range(3..=4usize);
            let b: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let r_u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r_l: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();

            let mut kkt = DMatrix::<f64>::zeros(n + m, n + m);
            for i in 0..n {
                for (j, v) in a.row(i) {
                    kkt[(i, j)] = v;
                }
            }
            for (k, col) in b.iter().enumerate() {
                for i in 0..n {
                    kkt[(i, n + k)] = col[i];
                    kkt[(n + k, i)] = col[i];
                }
            }
            let rhs = DVector::from_iterator(n + m, r_u.iter().chain(&r_l).copied());
            let exact = kkt
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Solver("dense KKT matrix is singular".into()))?;
            let exact: Vec<f64> = exact.iter().copied().collect();

            let inner = build_inner_solver(&a, InnerMode::Direct)?;
            let direct = solve_saddle_direct(&SaddlePointSystem::new(b.clone(), r_u.clone(), r_l.clone())?, &inner)?;
            let stacked = |du: &[f64], dl: &[f64]| du.iter().chain(dl).copied().collect::<Vec<f64>>();
            worst_direct = worst_direct.max(rel_err(&stacked(&direct.du, &direct.dlambda), &exact));
            let g = schur_gmres(&inner, &b, &r_u, &r_l, &vec![0.0; m], m, 1e-14)?;
            worst_gmres = worst_gmres.max(rel_err(&stacked(&g.solution.du, &g.solution.dlambda), &exact));
            // Iterations beyond m, or no convergence, count as excess.
            let excess = if g.converged { g.iterations.saturating_sub(m) } else { m + 1 };
            worst_iters = worst_iters.max(excess as f64);
        }
        checks.push(Check::new("direct Schur vs dense KKT (rel)", worst_direct, 1e-8));
        checks.push(Check::new("GMRES Schur vs dense KKT (rel)", worst_gmres, 1e-8));
        checks.push(Check::new("GMRES iterations beyond m", worst_iters, 0.0));
        Ok(())
    })
}

/// `det(I + t Dv) = sum t^k f_k` and the coefficients against invariants
/// computed from a dense matrix library.
pub fn detexp_suite(seed: u64) -> Result<SuiteReport> {
    timed("detexp", 1.0, |checks| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut worst_sum, mut worst_coeff) = (0.0f64, 0.0f64);
        for i in 0..1000 {
            let d = if i % 2 == 0 { 2 } else { 3 };
            let dv: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t: f64 = rng.random_range(-1.0..1.0);
            let f = det_expansion_coeffs(&dv, d)?;
            let poly: f64 = f.iter().enumerate().map(|(k, fk)| t.powi(k as i32) * fk).sum();
            let m = DMatrix::from_row_slice(d, d, &dv);
            let det = (DMatrix::<f64>::identity(d, d) + &m * t).determinant();
            worst_sum = worst_sum.max((poly - det).abs());
            if d == 3 {
                let m3 = Matrix3::from_row_slice(&dv);
                let tr = m3.trace();
                let expect = [1.0, tr, 0.5 * (tr * tr - (m3 * m3).trace()), m3.determinant()];
                for (a, b) in f.iter().zip(expect) {
                    worst_coeff = worst_coeff.max((a - b).abs());
                }
            }
        }
        checks.push(Check::new("|sum t^k f_k - det(I + t Dv)|", worst_sum, 1e-12));
        checks.push(Check::new("d = 3 coefficients vs invariants", worst_coeff, 1e-12));
        Ok(())
    })
}

/// Residual monotonicity, basis orthonormality and Givens contracts.
pub fn gmres_suite(seed: u64) -> Result<SuiteReport> {
    timed("gmres", 1.0, |checks| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut mono, mut orth, mut unit, mut elim, mut recur) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..100 {
            let k = rng.random_range(4..=12usize);
            let shift = rng.random_range(0.0..3.0);
            let a = DMatrix::<f64>::from_fn(k, k, |i, j| {
                rng.random_range(-1.0..1.0) + if i == j { shift } else { 0.0 }
            });
            let b: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let apply = |x: &[f64]| -> Result<Vec<f64>> {
                Ok((&a * DVector::from_column_slice(x)).iter().copied().collect())
            };
            let out = gmres(apply, &b, &vec![0.0; k], k, 1e-14)?;
            for w in out.residuals.windows(2) {
                mono = mono.max((w[1] - w[0]).max(0.0) / w[0].max(f64::MIN_POSITIVE));
            }
            let q = DMatrix::from_fn(k, out.basis.len(), |i, j| out.basis[j][i]);
            let gram = q.transpose() * &q - DMatrix::<f64>::identity(out.basis.len(), out.basis.len());
            orth = orth.max(gram.amax());
            // Givens rotations of every Hessenberg column, replayed independently.
            for col in &out.hessenberg {
                let mut h = col.clone();
                let j = h.len() - 2;
                let (c, s, r) = givens(h[j], h[j + 1])?;
                unit = unit.max((c * c + s * s - 1.0).abs());
                elim = elim.max((-s * h[j] + c * h[j + 1]).abs() / r);
                h[j] = c * h[j] + s * h[j + 1];
                recur = recur.max((h[j] - r).abs() / r);
            }
        }
        checks.push(Check::new("residual increase (rel)", mono, 1e-14));
        checks.push(Check::new("|Q^T Q - I|_max", orth, 1e-12));
        checks.push(Check::new("|c^2 + s^2 - 1|", unit, 1e-15));
        checks.push(Check::new("eliminated entry / r", elim, 1e-15));
        checks.push(Check::new("rotated pivot vs r (rel)", recur, 1e-15));
        Ok(())
    })
}
