use std::sync::Arc;

use super::{timed, Check, SuiteReport};
use crate::error::Result;
use crate::fem::{evaluate_field, quadrature_rule, DofMap, Element, FunctionSpace, SpaceKind};
use crate::flow::{assemble_ns_system, solve_flow, BoundaryVelocity, FlowOptions, FlowProblem, FlowState, TaylorHood};
use crate::mesh::{generate_benchmark_mesh, rectangle_mesh, Mesh, RectangleMarkers};

const NU: f64 = 0.1;

fn exact_velocity(x: [f64; 2]) -> [f64; 2] {
    [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin()]
}

/// Unit square, Dirichlet data everywhere but on the right edge, which
/// carries the traction of the exact solution
/// `v = (sin x cos y, -cos x sin y)`, `q = x y`.
fn manufactured_problem() -> FlowProblem {
    FlowProblem {
        nu: NU,
        boundary: BoundaryVelocity::Custom(Arc::new(|x, _| exact_velocity(x))),
        // -nu lap v = 2 nu v, (grad v) v = (sin x cos x, sin y cos y).
        forcing: Some(Arc::new(|x| {
            let v = exact_velocity(x);
            [
                2.0 * NU * v[0] + x[0].sin() * x[0].cos() + x[1],
                2.0 * NU * v[1] + x[1].sin() * x[1].cos() + x[0],
            ]
        })),
        // nu d_x v - q e_1.
        traction: Some(Arc::new(|x| {
            [NU * x[0].cos() * x[1].cos() - x[0] * x[1], NU * x[0].sin() * x[1].sin()]
        })),
    }
}

fn l2_velocity_error(mesh: &Mesh, state: &FlowState) -> Result<f64> {
    let space = FunctionSpace::new(SpaceKind::P2Vector, mesh);
    let quad = quadrature_rule(8)?;
    let mut err = 0.0;
    for t in 0..mesh.n_triangles() {
        let e = Element::new(mesh, t)?;
        for (l, w) in quad.points.iter().zip(&quad.weights) {
            let v = evaluate_field(mesh, &space, &state.v, t, *l)?.value;
            let ex = exact_velocity(e.map(*l));
            err += w * e.geometry.area() * ((v[0] - ex[0]).powi(2) + (v[1] - ex[1]).powi(2));
        }
    }
    Ok(err.sqrt())
}

/// Largest discrete divergence residual `|int psi_a div v|`.
fn divergence_residual(mesh: &Mesh, problem: &FlowProblem, state: &FlowState) -> Result<f64> {
    let space = TaylorHood::new(mesh);
    debug_assert_eq!(space.dof_count(), state.v.len() + state.q.len());
    let (r, _) = assemble_ns_system(mesh, &space, problem, &state.stacked(), true)?;
    Ok(r[space.n_velocity()..].iter().map(|v| v.abs()).fold(0.0, f64::max))
}

/// Manufactured-solution convergence and divergence residuals.
pub fn flow_suite() -> Result<SuiteReport> {
    timed("flow", 120.0, |checks| {
        let problem = manufactured_problem();
        let options = FlowOptions::default();
        let mut errors = Vec::new();
        let mut div = 0.0f64;
        for n in [4, 8, 16, 32] {
            let mesh = rectangle_mesh((0.0, 1.0), (0.0, 1.0), n, n, RectangleMarkers::default())?;
            let state = solve_flow(&mesh, &problem, &options, None)?;
            errors.push(l2_velocity_error(&mesh, &state)?);
            div = div.max(divergence_residual(&mesh, &problem, &state)?);
        }
        let min_order = errors.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
        log::info!("manufactured L2 velocity errors: {errors:?}");
        checks.push(Check::at_least("smallest observed L2 velocity order", min_order, 2.5));

        let h = generate_benchmark_mesh(20.0, 6.0, 0.4, 6)?;
        let channel = FlowProblem::channel(0.02, 6.0);
        let state = solve_flow(h.finest(), &channel, &options, None)?;
        div = div.max(divergence_residual(h.finest(), &channel, &state)?);
        checks.push(Check::new("max divergence residual", div, 1e-10));
        Ok(())
    })
}
