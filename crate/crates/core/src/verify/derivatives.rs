use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{rel_err, timed, Check, SuiteReport};
use crate::descent::{
    assemble_constraint_jacobian, assemble_defect, assemble_hessian, constraint_values, fixed_dofs,
    lagrangian_value,
};
use crate::error::Result;
use crate::flow::{
    assemble_ns_system, energy_dissipation, shape_gradient, solve_adjoint, solve_flow, FlowOptions, FlowProblem,
    TaylorHood,
};
use crate::mesh::{generate_benchmark_mesh, rectangle_mesh, Marker, Mesh, RectangleMarkers};

const H: f64 = 1e-6;

fn axpy(u: &[f64], t: f64, w: &[f64]) -> Vec<f64> {
    u.iter().zip(w).map(|(a, b)| a + t * b).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Descent test mesh whose right and top sides are free (obstacle-marked).
fn descent_mesh() -> Result<Mesh> {
    let markers = RectangleMarkers {
        left: Marker::Inflow,
        right: Marker::Obstacle,
        bottom: Marker::Wall,
        top: Marker::Obstacle,
    };
    rectangle_mesh((-1.0, 1.0), (-0.5, 1.0), 8, 6, markers)
}

fn free_field(mesh: &Mesh, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut u: Vec<f64> = (0..2 * mesh.n_nodes()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    for d in fixed_dofs(mesh) {
        u[d] = 0.0;
    }
    u
}

/// Descent and flow derivatives against central differences.
pub fn derivative_suite(seed: u64) -> Result<SuiteReport> {
    timed("derivatives", 120.0, |checks| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mesh = descent_mesh()?;
        let lam = [0.3, -0.7, 1.1];
        let sigma = 0.8;

        for p in [2.0, 2.57, 3.5, 4.5] {
            let u = free_field(&mesh, 0.02, &mut rng);
            let g = free_field(&mesh, 1.0, &mut rng);
            let (r, _) = assemble_defect(&mesh, &u, &lam, sigma, &g, p)?;
            let mut worst = 0.0f64;
            for _ in 0..10 {
                let w = free_field(&mesh, 1.0, &mut rng);
                let fd = (lagrangian_value(&mesh, &axpy(&u, H, &w), &lam, sigma, &g, p)?
                    - lagrangian_value(&mesh, &axpy(&u, -H, &w), &lam, sigma, &g, p)?)
                    / (2.0 * H);
                let an = -dot(&r, &w);
                worst = worst.max((fd - an).abs() / an.abs().max(f64::MIN_POSITIVE));
            }
            checks.push(Check::new(format!("defect vs dL/du, p = {p}"), worst, 1e-5));
        }

        for p in [4.0, 4.5] {
            let u = free_field(&mesh, 0.05, &mut rng);
            let g = free_field(&mesh, 1.0, &mut rng);
            let a = assemble_hessian(&mesh, &u, &lam, p, 1e-8)?;
            let fixed = fixed_dofs(&mesh);
            let mut worst = 0.0f64;
            for _ in 0..10 {
                let w = free_field(&mesh, 1.0, &mut rng);
                let (rp, _) = assemble_defect(&mesh, &axpy(&u, H, &w), &lam, sigma, &g, p)?;
                let (rm, _) = assemble_defect(&mesh, &axpy(&u, -H, &w), &lam, sigma, &g, p)?;
                let mut fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| -(a - b) / (2.0 * H)).collect();
                let mut aw = a.mul_vec(&w);
                for &d in &fixed {
                    fd[d] = 0.0;
                    aw[d] = 0.0;
                }
                worst = worst.max(rel_err(&fd, &aw));
            }
            checks.push(Check::new(format!("Hessian action vs FD of defect, p = {p}"), worst, 1e-4));
        }

        let u = free_field(&mesh, 0.05, &mut rng);
        let b = assemble_constraint_jacobian(&mesh, &u)?;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let w = free_field(&mesh, 1.0, &mut rng);
            let gp = constraint_values(&mesh, &axpy(&u, H, &w))?;
            let gm = constraint_values(&mesh, &axpy(&u, -H, &w))?;
            let fd: Vec<f64> = (0..3).map(|i| (gp[i] - gm[i]) / (2.0 * H)).collect();
            let an: Vec<f64> = b.iter().map(|col| dot(col, &w)).collect();
            worst = worst.max(rel_err(&fd, &an));
        }
        checks.push(Check::new("constraint Jacobian vs FD of g", worst, 1e-6));

        checks.push(Check::new("flow Jacobian vs FD of residual", flow_jacobian_error(&mut rng)?, 1e-6));
        checks.push(Check::new("shape gradient vs FD of reduced J", shape_gradient_error(&mut rng)?, 1e-4));
        Ok(())
    })
}

fn flow_jacobian_error(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mesh = rectangle_mesh((0.0, 2.0), (0.0, 1.0), 6, 3, RectangleMarkers::default())?;
    let space = TaylorHood::new(&mesh);
    let problem = FlowProblem::channel(0.05, 1.0);
    let n = crate::fem::DofMap::dof_count(&space);
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (_, jac) = assemble_ns_system(&mesh, &space, &problem, &y, true)?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (rp, _) = assemble_ns_system(&mesh, &space, &problem, &axpy(&y, H, &w), true)?;
        let (rm, _) = assemble_ns_system(&mesh, &space, &problem, &axpy(&y, -H, &w), true)?;
        let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * H)).collect();
        worst = worst.max(rel_err(&fd, &jac.mul_vec(&w)));
    }
    Ok(worst)
}

fn reduced_objective(mesh: &Mesh, problem: &FlowProblem) -> Result<f64> {
    let state = solve_flow(mesh, problem, &FlowOptions { tol: 1e-13, max_newton: 25 }, None)?;
    energy_dissipation(mesh, &state)
}

/// Directional derivatives along random node perturbations supported near
/// the obstacle, on a benchmark mesh of 304 triangles.
fn shape_gradient_error(rng: &mut ChaCha8Rng) -> Result<f64> {
    let h = generate_benchmark_mesh(20.0, 6.0, 0.4, 4)?;
    let mesh = h.finest();
    let problem = FlowProblem::channel(0.02, 6.0);
    let state = solve_flow(mesh, &problem, &FlowOptions::default(), None)?;
    let adjoint = solve_adjoint(mesh, &problem, &state)?;
    let g = shape_gradient(mesh, &problem, &state, &adjoint)?;
    let fixed = mesh.nodes_on(&[Marker::Inflow, Marker::Outflow, Marker::Wall]);
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let w: Vec<f64> = (0..2 * mesh.n_nodes())
            .map(|d| {
                let x = mesh.nodes()[d / 2];
                if fixed[d / 2] || x[0].abs() > 1.5 || x[1].abs() > 1.5 {
                    0.0
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        let moved = |t: f64| -> Result<Mesh> {
            let nodes = mesh.nodes().iter().enumerate().map(|(i, x)| [x[0] + t * w[2 * i], x[1] + t * w[2 * i + 1]]);
            Mesh::new(nodes.collect(), mesh.triangles().to_vec(), mesh.boundary_edges().to_vec())
        };
        let fd = (reduced_objective(&moved(H)?, &problem)? - reduced_objective(&moved(-H)?, &problem)?) / (2.0 * H);
        let an = dot(&g, &w);
        worst = worst.max((fd - an).abs() / an.abs());
    }
    Ok(worst)
}
