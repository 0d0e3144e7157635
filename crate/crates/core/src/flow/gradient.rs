use super::assemble::{fields, gather, point_data, FLOW_QUADRATURE};
use super::problem::{FlowProblem, TaylorHood};
use super::solve::{AdjointState, FlowState};
use crate::descent::fixed_dofs;
use crate::error::{Error, Result};
use crate::fem::{quadrature_rule, Element};
use crate::mesh::Mesh;

/// Derivative of `J` with respect to the node coordinates (P1, interleaved),
/// zero on inflow, outflow and wall nodes.
///
/// With the adjoint `(z, r)` and `l = nu/2 |grad v|^2 + nu grad v : grad z
/// + (grad v v).z - q div z - r div v` the entry for node `a`, component `k`
/// is `int sum_j T_kj d_j lambda_a` with
/// `T = l I - nu grad v^T grad v - nu (grad z^T grad v + grad v^T grad z)
/// - (grad v^T z) (x) v + q grad z^T + r grad v^T`.
pub fn shape_gradient(
    mesh: &Mesh,
    problem: &FlowProblem,
    state: &FlowState,
    adjoint: &AdjointState,
) -> Result<Vec<f64>> {
    if problem.forcing.is_some() || problem.traction.is_some() {
        return Err(Error::Contract(
            "shape gradient supports only unforced flow with a do-nothing outflow".into(),
        ));
    }
    let space = TaylorHood::new(mesh);
    let y = state.stacked();
    let mut ya = adjoint.z.clone();
    ya.extend_from_slice(&adjoint.r);
    if y.len() != ya.len() || y.len() != crate::fem::DofMap::dof_count(&space) {
        return Err(Error::Contract("flow and adjoint states do not match the mesh".into()));
    }
    let nu = problem.nu;
    let quad = quadrature_rule(FLOW_QUADRATURE)?;
    let mut grad = vec![0.0; 2 * mesh.n_nodes()];
    for t in 0..mesh.n_triangles() {
        let e = Element::new(mesh, t)?;
        let lg = e.geometry.barycentric_gradients();
        let loc = gather(&space, &y, t);
        let loc_a = gather(&space, &ya, t);
        let mut tt = [[0.0; 2]; 2];
        for pd in point_data(&e, &quad) {
            let (v, gv, q) = fields(&pd, &loc);
            let (z, gz, r) = fields(&pd, &loc_a);
            let ddot = |a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]| {
                a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
            };
            let adv = [gv[0][0] * v[0] + gv[0][1] * v[1], gv[1][0] * v[0] + gv[1][1] * v[1]];
            let div_v = gv[0][0] + gv[1][1];
            let div_z = gz[0][0] + gz[1][1];
            let l = 0.5 * nu * ddot(&gv, &gv) + nu * ddot(&gv, &gz) + adv[0] * z[0] + adv[1] * z[1]
                - q * div_z
                - r * div_v;
            // (grad v^T z)_i = sum_c d_i v_c z_c.
            let gvz = [gv[0][0] * z[0] + gv[1][0] * z[1], gv[0][1] * z[0] + gv[1][1] * z[1]];
            for i in 0..2 {
                for j in 0..2 {
                    let mut val = if i == j { l } else { 0.0 };
                    for c in 0..2 {
                        val -= nu * (gv[c][i] * gv[c][j] + gz[c][i] * gv[c][j] + gv[c][i] * gz[c][j]);
                    }
                    val += -gvz[i] * v[j] + q * gz[j][i] + r * gv[j][i];
                    tt[i][j] += pd.weight * val;
                }
            }
        }
        let nodes = mesh.triangles()[t];
        for a in 0..3 {
            for k in 0..2 {
                grad[2 * nodes[a] + k] += tt[k][0] * lg[a][0] + tt[k][1] * lg[a][1];
            }
        }
    }
    for d in fixed_dofs(mesh) {
        grad[d] = 0.0;
    }
    if grad.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("shape gradient is not finite".into()));
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{energy_dissipation, solve_adjoint, solve_flow, FlowOptions};
    use crate::mesh::{generate_benchmark_mesh, Marker};

    fn objective(mesh: &Mesh, p: &FlowProblem) -> f64 {
        let s = solve_flow(mesh, p, &FlowOptions { tol: 1e-13, max_newton: 25 }, None).unwrap();
        energy_dissipation(mesh, &s).unwrap()
    }

    #[test]
    fn matches_finite_differences_of_resolved_objective() {
        let h = generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        let m = h.finest();
        let p = FlowProblem::channel(0.02, 6.0);
        let s = solve_flow(m, &p, &FlowOptions::default(), None).unwrap();
        let adj = solve_adjoint(m, &p, &s).unwrap();
        let g = shape_gradient(m, &p, &s, &adj).unwrap();
        let obstacle = m.nodes_on(&[Marker::Obstacle]);
        let fixed = m.nodes_on(&[Marker::Inflow, Marker::Outflow, Marker::Wall]);
        // Obstacle nodes and a few interior nodes near the obstacle.
        let mut picks: Vec<usize> = (0..m.n_nodes()).filter(|&i| obstacle[i]).step_by(5).collect();
        picks.extend(
            (0..m.n_nodes())
                .filter(|&i| !obstacle[i] && !fixed[i] && m.nodes()[i][0].abs() < 1.0 && m.nodes()[i][1].abs() < 1.0)
                .take(3),
        );
        let gmax = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let hstep = 1e-6;
        for &i in &picks {
            for k in 0..2 {
                let shifted = |d: f64| {
                    let mut nodes = m.nodes().to_vec();
                    nodes[i][k] += d;
                    Mesh::new(nodes, m.triangles().to_vec(), m.boundary_edges().to_vec()).unwrap()
                };
                let fd = (objective(&shifted(hstep), &p) - objective(&shifted(-hstep), &p)) / (2.0 * hstep);
                let an = g[2 * i + k];
                assert!(
                    (fd - an).abs() <= 1e-4 * an.abs().max(1e-2 * gmax),
                    "node {i} comp {k}: fd {fd:.8e} vs {an:.8e}"
                );
            }
        }
    }

    #[test]
    fn fixed_boundary_entries_vanish() {
        let h = generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        let m = h.finest();
        let p = FlowProblem::channel(0.02, 6.0);
        let s = solve_flow(m, &p, &FlowOptions::default(), None).unwrap();
        let g = shape_gradient(m, &p, &s, &solve_adjoint(m, &p, &s).unwrap()).unwrap();
        for d in fixed_dofs(m) {
            assert_eq!(g[d], 0.0);
        }
        assert!(g.iter().any(|v| *v != 0.0));
    }

    #[test]
    fn forcing_is_rejected() {
        let h = generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        let m = h.finest();
        let mut p = FlowProblem::channel(0.02, 6.0);
        let s = solve_flow(m, &p, &FlowOptions::default(), None).unwrap();
        let adj = solve_adjoint(m, &p, &s).unwrap();
        p.forcing = Some(std::sync::Arc::new(|_| [1.0, 0.0]));
        assert!(shape_gradient(m, &p, &s, &adj).is_err());
    }
}
