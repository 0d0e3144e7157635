use super::assemble::{assemble_ns_into, fields, gather, point_data, FLOW_QUADRATURE};
use super::problem::{velocity_dirichlet, FlowProblem, TaylorHood};
use crate::error::{Error, Result};
use crate::fem::{apply_dirichlet, quadrature_rule, sparsity_pattern, DofMap, Element, SparseLu, SparseMatrix};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Stop when the Euclidean norm of the residual over free dofs drops below.
    pub tol: f64,
    pub max_newton: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { tol: 1e-10, max_newton: 25 }
    }
}

/// Discrete velocity (P2, interleaved) and pressure (P1).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub v: Vec<f64>,
    pub q: Vec<f64>,
    pub nu: f64,
    /// Free-dof residual norm at exit.
    pub residual: f64,
    /// Newton iterations after the Stokes start.
    pub iterations: usize,
}

impl FlowState {
    pub fn stacked(&self) -> Vec<f64> {
        let mut y = self.v.clone();
        y.extend_from_slice(&self.q);
        y
    }
}

fn free_norm(r: &[f64], fixed: &[bool]) -> f64 {
    r.iter().zip(fixed).filter(|(_, f)| !**f).map(|(v, _)| v * v).sum::<f64>().sqrt()
}

/// Residual with the Dirichlet rows zeroed.
fn masked_residual(
    jac: &mut SparseMatrix,
    mesh: &Mesh,
    space: &TaylorHood,
    problem: &FlowProblem,
    y: &[f64],
    fixed: &[bool],
    convection: bool,
) -> Result<Vec<f64>> {
    let mut r = assemble_ns_into(jac, mesh, space, problem, y, convection)?;
    for (v, f) in r.iter_mut().zip(fixed) {
        if *f {
            *v = 0.0;
        }
    }
    Ok(r)
}

/// Solves the stationary Navier-Stokes equations by Newton's method started
/// from the Stokes solution, or from `initial` when given.
pub fn solve_flow(
    mesh: &Mesh,
    problem: &FlowProblem,
    options: &FlowOptions,
    initial: Option<&FlowState>,
) -> Result<FlowState> {
    problem.validate()?;
    let space = TaylorHood::new(mesh);
    let n = space.dof_count();
    let (dofs, vals) = velocity_dirichlet(mesh, problem);
    let zeros = vec![0.0; dofs.len()];
    let mut fixed = vec![false; n];
    for &d in &dofs {
        fixed[d] = true;
    }
    let mut jac = sparsity_pattern(mesh, &space, &space)?;

    let mut y = match initial {
        Some(s) if s.v.len() + s.q.len() == n => s.stacked(),
        Some(_) => {
            return Err(Error::Contract("initial flow state does not match the mesh".into()));
        }
        None => vec![0.0; n],
    };
    for (&d, &v) in dofs.iter().zip(&vals) {
        y[d] = v;
    }
    if initial.is_none() {
        // Stokes start: one exact Newton step on the linear problem.
        let r = masked_residual(&mut jac, mesh, &space, problem, &y, &fixed, false)?;
        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        apply_dirichlet(&mut jac, Some(&mut rhs), &dofs, &zeros)?;
        let dy = SparseLu::factor(&jac)?.solve(&rhs)?;
        for (a, b) in y.iter_mut().zip(&dy) {
            *a += b;
        }
    }

    let mut r = masked_residual(&mut jac, mesh, &space, problem, &y, &fixed, true)?;
    let mut norm = free_norm(&r, &fixed);
    let mut iterations = 0;
    while norm > options.tol {
        if iterations == options.max_newton {
            return Err(Error::NonConvergence { what: "Navier-Stokes Newton".into(), iterations, residual: norm });
        }
        iterations += 1;
        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        apply_dirichlet(&mut jac, Some(&mut rhs), &dofs, &zeros)?;
        let dy = SparseLu::factor(&jac)?.solve(&rhs)?;
        // Backtrack on the residual norm; accept the smallest step regardless.
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = y.iter().zip(&dy).map(|(a, b)| a + t * b).collect();
            let rt = masked_residual(&mut jac, mesh, &space, problem, &trial, &fixed, true)?;
            let nt = free_norm(&rt, &fixed);
            if nt < norm || t < 1.0 / 64.0 {
                y = trial;
                r = rt;
                norm = nt;
                break;
            }
            t *= 0.5;
        }
        log::debug!("flow Newton it={iterations} residual={norm:.3e} step={t}");
    }
    let (v, q) = space.split(&y);
    Ok(FlowState { v: v.to_vec(), q: q.to_vec(), nu: problem.nu, residual: norm, iterations })
}

/// `J = nu/2 int grad v : grad v`.
pub fn energy_dissipation(mesh: &Mesh, state: &FlowState) -> Result<f64> {
    let space = TaylorHood::new(mesh);
    let y = state.stacked();
    check_state(&space, &y)?;
    let q = quadrature_rule(FLOW_QUADRATURE)?;
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        let e = Element::new(mesh, t)?;
        let loc = gather(&space, &y, t);
        for pd in point_data(&e, &q) {
            let (_, g, _) = fields(&pd, &loc);
            total += pd.weight * (g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2));
        }
    }
    Ok(0.5 * state.nu * total)
}

fn check_state(space: &TaylorHood, y: &[f64]) -> Result<()> {
    if y.len() != space.dof_count() {
        return Err(Error::Contract(format!(
            "flow state has {} entries, expected {}",
            y.len(),
            space.dof_count()
        )));
    }
    Ok(())
}

/// `dJ/dy`: velocity part `nu int grad v : grad phi`, zero pressure part.
pub fn objective_gradient(mesh: &Mesh, state: &FlowState) -> Result<Vec<f64>> {
    let space = TaylorHood::new(mesh);
    let y = state.stacked();
    check_state(&space, &y)?;
    let q = quadrature_rule(FLOW_QUADRATURE)?;
    let mut out = vec![0.0; y.len()];
    for t in 0..mesh.n_triangles() {
        let e = Element::new(mesh, t)?;
        let loc = gather(&space, &y, t);
        let dofs = space.cell_dofs(t);
        for pd in point_data(&e, &q) {
            let (_, g, _) = fields(&pd, &loc);
            for m in 0..6 {
                for l in 0..2 {
                    out[dofs[2 * m + l]] +=
                        pd.weight * state.nu * (g[l][0] * pd.dphi[m][0] + g[l][1] * pd.dphi[m][1]);
                }
            }
        }
    }
    Ok(out)
}

/// Adjoint velocity `z` and pressure `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointState {
    pub z: Vec<f64>,
    pub r: Vec<f64>,
}

/// Solves `(dR/dy)^T y* = -dJ/dy` with homogeneous Dirichlet data.
pub fn solve_adjoint(mesh: &Mesh, problem: &FlowProblem, state: &FlowState) -> Result<AdjointState> {
    let space = TaylorHood::new(mesh);
    let y = state.stacked();
    check_state(&space, &y)?;
    let (dofs, _) = velocity_dirichlet(mesh, problem);
    let mut jac = sparsity_pattern(mesh, &space, &space)?;
    assemble_ns_into(&mut jac, mesh, &space, problem, &y, true)?;
    let mut rhs: Vec<f64> = objective_gradient(mesh, state)?.iter().map(|v| -v).collect();
    apply_dirichlet(&mut jac, Some(&mut rhs), &dofs, &vec![0.0; dofs.len()])?;
    let adj = SparseLu::factor(&jac)?.solve_transpose(&rhs)?;
    let (z, r) = space.split(&adj);
    Ok(AdjointState { z: z.to_vec(), r: r.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{interpolate_scalar, interpolate_vector, FunctionSpace, SpaceKind};
    use crate::flow::problem::BoundaryVelocity;
    use crate::mesh::{rectangle_mesh, Marker, RectangleMarkers};
    use std::sync::Arc;

    fn unit_square(n: usize) -> Mesh {
        rectangle_mesh((0.0, 1.0), (0.0, 1.0), n, n, RectangleMarkers::default()).unwrap()
    }

    type Exact = (fn([f64; 2]) -> [f64; 2], fn([f64; 2]) -> [[f64; 2]; 2], fn([f64; 2]) -> f64);

    /// Problem whose exact solution is `(v, q)`: forcing from the strong form
    /// with `-nu lap v` supplied, and the outflow traction `nu d_n v - q n`
    /// on the right edge (`n = e_1`).
    fn manufactured(nu: f64, exact: Exact, neg_lap: fn([f64; 2]) -> [f64; 2], grad_q: fn([f64; 2]) -> [f64; 2]) -> FlowProblem {
        let (v, dv, q) = exact;
        FlowProblem {
            nu,
            boundary: BoundaryVelocity::Custom(Arc::new(move |x, _| v(x))),
            forcing: Some(Arc::new(move |x| {
                let (u, g, l, gq) = (v(x), dv(x), neg_lap(x), grad_q(x));
                let mut f = [0.0; 2];
                for c in 0..2 {
                    f[c] = nu * l[c] + g[c][0] * u[0] + g[c][1] * u[1] + gq[c];
                }
                f
            })),
            traction: Some(Arc::new(move |x| {
                let g = dv(x);
                [nu * g[0][0] - q(x), nu * g[1][0]]
            })),
        }
    }

    #[test]
    fn quadratic_solution_is_reproduced() {
        // v = (y^2, 0), q = x lies in the discrete spaces.
        let nu = 0.5;
        let exact: Exact = (|x| [x[1] * x[1], 0.0], |x| [[0.0, 2.0 * x[1]], [0.0, 0.0]], |x| x[0]);
        let p = manufactured(nu, exact, |_| [-2.0, 0.0], |_| [1.0, 0.0]);
        let m = unit_square(3);
        let s = solve_flow(&m, &p, &FlowOptions::default(), None).unwrap();
        let vs = FunctionSpace::new(SpaceKind::P2Vector, &m);
        let ve = interpolate_vector(&m, &vs, exact.0);
        let qe = interpolate_scalar(&m, exact.2);
        let dv = s.v.iter().zip(&ve).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dq = s.q.iter().zip(&qe).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dv < 1e-10 && dq < 1e-10, "{dv} {dq}");
    }

    fn trig_l2_error(n: usize) -> f64 {
        let nu = 0.1;
        let exact: Exact = (
            |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin()],
            |x| {
                [
                    [x[0].cos() * x[1].cos(), -x[0].sin() * x[1].sin()],
                    [x[0].sin() * x[1].sin(), -x[0].cos() * x[1].cos()],
                ]
            },
            |x| x[0] * x[1],
        );
        let p = manufactured(
            nu,
            exact,
            |x| [2.0 * x[0].sin() * x[1].cos(), -2.0 * x[0].cos() * x[1].sin()],
            |x| [x[1], x[0]],
        );
        let m = unit_square(n);
        let s = solve_flow(&m, &p, &FlowOptions::default(), None).unwrap();
        let vs = FunctionSpace::new(SpaceKind::P2Vector, &m);
        let q = quadrature_rule(8).unwrap();
        let mut err = 0.0;
        for t in 0..m.n_triangles() {
            let e = Element::new(&m, t).unwrap();
            for (l, w) in q.points.iter().zip(&q.weights) {
                let fv = crate::fem::evaluate_field(&m, &vs, &s.v, t, *l).unwrap();
                let ex = (exact.0)(e.map(*l));
                err += w * e.geometry.area() * ((fv.value[0] - ex[0]).powi(2) + (fv.value[1] - ex[1]).powi(2));
            }
        }
        err.sqrt()
    }

    #[test]
    fn trigonometric_solution_converges_at_third_order() {
        let e1 = trig_l2_error(4);
        let e2 = trig_l2_error(8);
        let e3 = trig_l2_error(16);
        let r1 = (e1 / e2).log2();
        let r2 = (e2 / e3).log2();
        assert!(r1 > 2.5 && r2 > 2.5, "errors {e1:.3e} {e2:.3e} {e3:.3e}");
    }

    fn couette() -> (Mesh, FlowProblem) {
        let markers = RectangleMarkers {
            left: Marker::Inflow,
            right: Marker::Outflow,
            bottom: Marker::Wall,
            top: Marker::Wall,
        };
        let m = rectangle_mesh((0.0, 2.0), (0.0, 1.0), 4, 2, markers).unwrap();
        let p = FlowProblem {
            nu: 2.0,
            boundary: BoundaryVelocity::Custom(Arc::new(|x, mk| match mk {
                Marker::Wall if x[1] > 0.5 => [1.0, 0.0],
                Marker::Wall => [0.0, 0.0],
                _ => [x[1], 0.0],
            })),
            forcing: None,
            traction: None,
        };
        (m, p)
    }

    #[test]
    fn shear_flow_dissipation() {
        // v = (y, 0) on [0, 2] x [0, 1]: J = nu/2 * 1 * |Omega| = 2.
        let (m, p) = couette();
        let s = solve_flow(&m, &p, &FlowOptions::default(), None).unwrap();
        let j = energy_dissipation(&m, &s).unwrap();
        assert!((j - 2.0).abs() < 1e-10, "{j}");
        assert!(s.iterations <= 1);
    }

    #[test]
    fn zero_tolerance_does_not_converge() {
        let h = crate::mesh::generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        let p = FlowProblem::channel(0.02, 6.0);
        let err = solve_flow(h.finest(), &p, &FlowOptions { tol: 0.0, max_newton: 3 }, None).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 3, .. }), "{err}");
    }

    #[test]
    fn benchmark_flow_is_divergence_free_and_converged() {
        let h = crate::mesh::generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        let m = h.finest();
        let p = FlowProblem::channel(0.02, 6.0);
        let s = solve_flow(m, &p, &FlowOptions::default(), None).unwrap();
        assert!(s.residual <= 1e-10);
        let space = TaylorHood::new(m);
        let (r, _) = crate::flow::assemble_ns_system(m, &space, &p, &s.stacked(), true).unwrap();
        let rq = &r[space.n_velocity()..];
        assert!(rq.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-10);
        assert!(energy_dissipation(m, &s).unwrap() > 0.0);
    }

    #[test]
    fn adjoint_reproduces_viscosity_derivative() {
        // dJ/dnu = dJ_explicit/dnu + <y*, dR/dnu>, both from the adjoint.
        let h = crate::mesh::generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        let m = h.finest();
        let nu = 0.05;
        let p = FlowProblem::channel(nu, 6.0);
        let s = solve_flow(m, &p, &FlowOptions::default(), None).unwrap();
        let adj = solve_adjoint(m, &p, &s).unwrap();
        let j = energy_dissipation(m, &s).unwrap();
        // dR_v/dnu = int grad v : grad w = (dJ/dv) / nu.
        let g = objective_gradient(m, &s).unwrap();
        let inner: f64 = adj.z.iter().zip(&g).map(|(a, b)| a * b / nu).sum();
        let predicted = j / nu + inner;
        let dnu = 1e-6;
        let jp = energy_dissipation(m, &solve_flow(m, &FlowProblem::channel(nu + dnu, 6.0), &FlowOptions::default(), None).unwrap()).unwrap();
        let jm = energy_dissipation(m, &solve_flow(m, &FlowProblem::channel(nu - dnu, 6.0), &FlowOptions::default(), None).unwrap()).unwrap();
        let fd = (jp - jm) / (2.0 * dnu);
        assert!((fd - predicted).abs() <= 1e-5 * fd.abs(), "{fd} vs {predicted}");
    }
}
