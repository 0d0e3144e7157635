use super::kinematics::{check_len, fixed_dofs, Kinematics};
use crate::error::{Error, Result};
use crate::fem::{apply_dirichlet, FunctionSpace, SpaceKind, SparseMatrix};
use crate::mesh::Mesh;

/// Multipliers: barycenter (`x_1`, `x_2`) then volume.
pub type Multipliers = [f64; 3];

fn check_p(p: f64) -> Result<()> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("p must be >= 2, got {p}")));
    }
    Ok(())
}

fn check_gradient(mesh: &Mesh, gradient: &[f64]) -> Result<()> {
    if gradient.len() != 2 * mesh.n_nodes() {
        return Err(Error::Contract("shape gradient length differs from 2 * nodes".into()));
    }
    Ok(())
}

/// `L = 1/p int (Du:Du)^{p/2} + sigma G.u + sum_i lambda_i g_i(u)`.
pub fn lagrangian_value(
    mesh: &Mesh,
    u: &[f64],
    lambda: &Multipliers,
    sigma: f64,
    gradient: &[f64],
    p: f64,
) -> Result<f64> {
    check_len(mesh, u)?;
    check_gradient(mesh, gradient)?;
    check_p(p)?;
    let mut l = sigma * gradient.iter().zip(u).map(|(g, v)| g * v).sum::<f64>();
    for e in 0..mesh.n_triangles() {
        let k = Kinematics::new(mesh, u, e)?;
        l += k.area * k.s.powf(0.5 * p) / p;
        l += lambda[0] * k.area * k.det * k.xu[0];
        l += lambda[1] * k.area * k.det * k.xu[1];
        l += lambda[2] * k.area * (k.det - 1.0);
    }
    Ok(l)
}

/// `r_u = -dL/du` (fixed dofs zeroed) and `r_lambda = -g(u)`.
pub fn assemble_defect(
    mesh: &Mesh,
    u: &[f64],
    lambda: &Multipliers,
    sigma: f64,
    gradient: &[f64],
    p: f64,
) -> Result<(Vec<f64>, Multipliers)> {
    check_len(mesh, u)?;
    check_gradient(mesh, gradient)?;
    check_p(p)?;
    let mut r: Vec<f64> = gradient.iter().map(|g| -sigma * g).collect();
    let mut g = [0.0; 3];
    for e in 0..mesh.n_triangles() {
        let k = Kinematics::new(mesh, u, e)?;
        let sp = if p == 2.0 { 1.0 } else { k.s.powf(0.5 * (p - 2.0)) };
        for a in 0..3 {
            for c in 0..2 {
                let dd = k.det * k.t[a][c];
                let mut v = sp * k.m(a, c);
                for i in 0..2 {
                    let direct = if i == c { k.det / 3.0 } else { 0.0 };
                    v += lambda[i] * (direct + k.xu[i] * dd);
                }
                v += lambda[2] * dd;
                r[k.dofs[2 * a + c]] -= k.area * v;
            }
        }
        g[0] += k.area * k.det * k.xu[0];
        g[1] += k.area * k.det * k.xu[1];
        g[2] += k.area * (k.det - 1.0);
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("defect is not finite".into()));
    }
    for d in fixed_dofs(mesh) {
        r[d] = 0.0;
    }
    Ok((r, [-g[0], -g[1], -g[2]]))
}

/// Columns of `B = dg/du` (fixed rows zeroed): barycenter columns, then the
/// volume column `int grad phi^T DF^{-1} det DF`.
pub fn assemble_constraint_jacobian(mesh: &Mesh, u: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_len(mesh, u)?;
    let mut b = vec![vec![0.0; u.len()]; 3];
    for e in 0..mesh.n_triangles() {
        let k = Kinematics::new(mesh, u, e)?;
        for a in 0..3 {
            for c in 0..2 {
                let dof = k.dofs[2 * a + c];
                let dd = k.det * k.t[a][c];
                for i in 0..2 {
                    let direct = if i == c { k.det / 3.0 } else { 0.0 };
                    b[i][dof] += k.area * (direct + k.xu[i] * dd);
                }
                b[2][dof] += k.area * dd;
            }
        }
    }
    for d in fixed_dofs(mesh) {
        for col in &mut b {
            col[d] = 0.0;
        }
    }
    Ok(b)
}

/// Modified Hessian of the Lagrangian with fixed rows and columns
/// eliminated (unit diagonal).
///
/// The p-term uses `(p-2)(s + eps H(4-p))^{(p-4)/2} (Du:Dv)(Du:Dw) +
/// (s + eps)^{(p-2)/2} Dv:Dw` with `s = Du:Du` and `H(0) = 1`.
pub fn assemble_hessian(mesh: &Mesh, u: &[f64], lambda: &Multipliers, p: f64, eps: f64) -> Result<SparseMatrix> {
    let space = FunctionSpace::new(SpaceKind::P1Vector, mesh);
    let mut a = crate::fem::sparsity_pattern(mesh, &space, &space)?;
    assemble_hessian_into(&mut a, mesh, u, lambda, p, eps)?;
    Ok(a)
}

pub(crate) fn assemble_hessian_into(
    matrix: &mut SparseMatrix,
    mesh: &Mesh,
    u: &[f64],
    lambda: &Multipliers,
    p: f64,
    eps: f64,
) -> Result<()> {
    check_len(mesh, u)?;
    check_p(p)?;
    if !(eps >= 0.0) {
        return Err(Error::Parameter(format!("eps must be non-negative, got {eps}")));
    }
    let theta = if p <= 4.0 { 1.0 } else { 0.0 };
    matrix.set_zero();
    let mut block = [0.0; 36];
    for e in 0..mesh.n_triangles() {
        let k = Kinematics::new(mesh, u, e)?;
        let c1 = if p == 2.0 { 0.0 } else { (p - 2.0) * (k.s + eps * theta).powf(0.5 * (p - 4.0)) };
        let c2 = if p == 2.0 { 1.0 } else { (k.s + eps).powf(0.5 * (p - 2.0)) };
        let lam_vol = lambda[2];
        for a in 0..3 {
            for kk in 0..2 {
                let row = 2 * a + kk;
                for b in 0..3 {
                    for l in 0..2 {
                        let col = 2 * b + l;
                        let mut v = c1 * k.m(a, kk) * k.m(b, l);
                        if kk == l {
                            v += c2 * k.gg(a, b);
                        }
                        let d2 = k.det * (k.t[a][kk] * k.t[b][l] - k.t[a][l] * k.t[b][kk]);
                        for i in 0..2 {
                            let mut ci = k.xu[i] * d2;
                            if i == l {
                                ci += k.det * k.t[a][kk] / 3.0;
                            }
                            if i == kk {
                                ci += k.det * k.t[b][l] / 3.0;
                            }
                            v += lambda[i] * ci;
                        }
                        v += lam_vol * d2;
                        block[6 * row + col] = k.area * v;
                    }
                }
            }
        }
        if block.iter().any(|v| !v.is_finite()) {
            return Err(Error::Assembly { element: e });
        }
        matrix.add_local(&k.dofs, &k.dofs, &block)?;
    }
    let fixed = fixed_dofs(mesh);
    let zeros = vec![0.0; fixed.len()];
    apply_dirichlet(matrix, None, &fixed, &zeros)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_operator, quadrature_rule};
    use crate::mesh::{rectangle_mesh, Marker, RectangleMarkers};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Square with an obstacle-marked (hence free) boundary on the right and
    /// top, so that interior and two boundary sides carry free dofs.
    fn mesh() -> Mesh {
        let markers = RectangleMarkers {
            left: Marker::Inflow,
            right: Marker::Obstacle,
            bottom: Marker::Wall,
            top: Marker::Obstacle,
        };
        rectangle_mesh((-1.0, 1.0), (-0.5, 1.0), 5, 4, markers).unwrap()
    }

    fn random_field(m: &Mesh, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let fixed = fixed_dofs(m);
        let mut u: Vec<f64> = (0..2 * m.n_nodes()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        for d in fixed {
            u[d] = 0.0;
        }
        u
    }

    #[test]
    fn zero_state_defect_is_scaled_gradient() {
        let m = mesh();
        let n = 2 * m.n_nodes();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_field(&m, 1.0, &mut rng);
        let (r, rl) = assemble_defect(&m, &vec![0.0; n], &[0.0; 3], 0.5, &g, 3.0).unwrap();
        let g0 = super::super::constraint_values(&m, &vec![0.0; n]).unwrap();
        for i in 0..n {
            assert!((r[i] + 0.5 * g[i]).abs() < 1e-15);
        }
        for i in 0..3 {
            assert_eq!(rl[i], -g0[i]);
        }
    }

    #[test]
    fn defect_matches_lagrangian_differences() {
        let m = mesh();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [2.0, 2.57, 3.5, 4.5] {
            let u = random_field(&m, 0.02, &mut rng);
            let g = random_field(&m, 1.0, &mut rng);
            let lam = [0.3, -0.7, 1.1];
            let (r, _) = assemble_defect(&m, &u, &lam, 0.8, &g, p).unwrap();
            for _ in 0..5 {
                let w = random_field(&m, 1.0, &mut rng);
                let h = 1e-6;
                let plus: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + h * b).collect();
                let minus: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - h * b).collect();
                let fd = (lagrangian_value(&m, &plus, &lam, 0.8, &g, p).unwrap()
                    - lagrangian_value(&m, &minus, &lam, 0.8, &g, p).unwrap())
                    / (2.0 * h);
                let an: f64 = -r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "p={p}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn jacobian_matches_constraint_differences() {
        let m = mesh();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_field(&m, 0.05, &mut rng);
        let b = assemble_constraint_jacobian(&m, &u).unwrap();
        let w = random_field(&m, 1.0, &mut rng);
        let h = 1e-6;
        let plus: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - h * b).collect();
        let gp = super::super::constraint_values(&m, &plus).unwrap();
        let gm = super::super::constraint_values(&m, &minus).unwrap();
        for i in 0..3 {
            let fd = (gp[i] - gm[i]) / (2.0 * h);
            let an: f64 = b[i].iter().zip(&w).map(|(a, b)| a * b).sum();
            assert!((fd - an).abs() <= 1e-7 * an.abs().max(1.0), "{i}: {fd} vs {an}");
        }
    }

    #[test]
    fn volume_column_at_zero_is_gradient_integral() {
        let m = mesh();
        let n = 2 * m.n_nodes();
        let b = assemble_constraint_jacobian(&m, &vec![0.0; n]).unwrap();
        let mut expect = vec![0.0; n];
        for t in 0..m.n_triangles() {
            let geo = crate::fem::element_geometry(m.triangle_points(t)).unwrap();
            let g = geo.barycentric_gradients();
            for (a, &node) in m.triangles()[t].iter().enumerate() {
                for c in 0..2 {
                    expect[2 * node + c] += geo.area() * g[a][c];
                }
            }
        }
        for d in fixed_dofs(&m) {
            expect[d] = 0.0;
        }
        for i in 0..n {
            assert!((b[2][i] - expect[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn all_fixed_mesh_has_zero_jacobian() {
        let m = rectangle_mesh((0.0, 1.0), (0.0, 1.0), 1, 1, RectangleMarkers::default()).unwrap();
        let b = assemble_constraint_jacobian(&m, &vec![0.0; 2 * m.n_nodes()]).unwrap();
        assert!(b.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn hessian_matches_defect_differences_above_four() {
        let m = mesh();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_field(&m, 0.05, &mut rng);
        let g = random_field(&m, 1.0, &mut rng);
        let lam = [0.2, 0.4, -0.3];
        let p = 4.5;
        let a = assemble_hessian(&m, &u, &lam, p, 1e-8).unwrap();
        let fixed = fixed_dofs(&m);
        for _ in 0..5 {
            let w = random_field(&m, 1.0, &mut rng);
            let h = 1e-6;
            let plus: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + h * b).collect();
            let minus: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - h * b).collect();
            let (rp, _) = assemble_defect(&m, &plus, &lam, 1.0, &g, p).unwrap();
            let (rm, _) = assemble_defect(&m, &minus, &lam, 1.0, &g, p).unwrap();
            let aw = a.mul_vec(&w);
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for i in 0..w.len() {
                if fixed.contains(&i) {
                    continue;
                }
                let fd = -(rp[i] - rm[i]) / (2.0 * h);
                num = num.max((fd - aw[i]).abs());
                den = den.max(aw[i].abs());
            }
            assert!(num <= 1e-5 * den, "{num} vs {den}");
        }
    }

    #[test]
    fn hessian_symmetric() {
        let m = mesh();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_field(&m, 0.05, &mut rng);
        let a = assemble_hessian(&m, &u, &[0.5, -0.2, 0.9], 3.1, 1e-8).unwrap();
        assert!(a.asymmetry() <= 1e-12 * a.max_abs());
    }

    #[test]
    fn p_two_reduces_to_vector_laplacian() {
        let m = mesh();
        let n = 2 * m.n_nodes();
        let a = assemble_hessian(&m, &vec![0.0; n], &[0.0; 3], 2.0, 0.0).unwrap();
        let space = FunctionSpace::new(SpaceKind::P1Vector, &m);
        let q = quadrature_rule(1).unwrap();
        let mut lap = assemble_operator(&m, &space, &space, |e, blk| {
            let g = e.geometry.barycentric_gradients();
            for a in 0..3 {
                for b in 0..3 {
                    let v = q.weights[0] * e.geometry.area() * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    blk[6 * (2 * a) + 2 * b] = v;
                    blk[6 * (2 * a + 1) + 2 * b + 1] = v;
                }
            }
            Ok(())
        })
        .unwrap();
        let fixed = fixed_dofs(&m);
        apply_dirichlet(&mut lap, None, &fixed, &vec![0.0; fixed.len()]).unwrap();
        for i in 0..n {
            for (j, v) in lap.row(i) {
                assert!((a.get(i, j) - v).abs() < 1e-12);
            }
        }
    }
}
