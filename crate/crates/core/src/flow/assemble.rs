use super::problem::{FlowProblem, TaylorHood};
use crate::error::{Error, Result};
use crate::fem::basis::{p2_gradients, p2_values};
use crate::fem::{quadrature_rule, sparsity_pattern, DofMap, Element, QuadratureRule, SparseMatrix};
use crate::mesh::{Marker, Mesh};

/// Quadrature degree exact for the convection term of P2 velocities.
pub(crate) const FLOW_QUADRATURE: usize = 5;

/// Shape-function data of one quadrature point of a Taylor-Hood element.
pub(crate) struct PointData {
    pub weight: f64,
    pub phi: [f64; 6],
    pub dphi: [[f64; 2]; 6],
    pub psi: [f64; 3],
    pub x: [f64; 2],
}

pub(crate) fn point_data(e: &Element, q: &QuadratureRule) -> Vec<PointData> {
    let g = e.geometry.barycentric_gradients();
    q.points
        .iter()
        .zip(&q.weights)
        .map(|(l, w)| PointData {
            weight: w * e.geometry.area(),
            phi: p2_values(*l),
            dphi: p2_gradients(*l, &g),
            psi: *l,
            x: e.map(*l),
        })
        .collect()
}

/// Velocity value and gradient (`grad[c][j] = d_j v_c`) and pressure at a point.
pub(crate) fn fields(pd: &PointData, local: &[f64]) -> ([f64; 2], [[f64; 2]; 2], f64) {
    let mut v = [0.0; 2];
    let mut grad = [[0.0; 2]; 2];
    for i in 0..6 {
        for c in 0..2 {
            let u = local[2 * i + c];
            v[c] += u * pd.phi[i];
            grad[c][0] += u * pd.dphi[i][0];
            grad[c][1] += u * pd.dphi[i][1];
        }
    }
    let q = (0..3).map(|a| local[12 + a] * pd.psi[a]).sum();
    (v, grad, q)
}

pub(crate) fn gather(space: &TaylorHood, y: &[f64], t: usize) -> [f64; 15] {
    let mut out = [0.0; 15];
    for (o, &d) in out.iter_mut().zip(space.cell_dofs(t)) {
        *o = y[d];
    }
    out
}

/// Residual `R(y)` and Jacobian `dR/dy` of the discrete Navier-Stokes
/// system at `y = (v, q)`, before any Dirichlet treatment.
///
/// `R_v(w) = int nu grad v : grad w + (grad v v).w - q div w - f.w - int_out h.w`,
/// `R_q(s) = -int s div v`. With `convection = false` the Stokes operator is used.
pub fn assemble_ns_system(
    mesh: &Mesh,
    space: &TaylorHood,
    problem: &FlowProblem,
    y: &[f64],
    convection: bool,
) -> Result<(Vec<f64>, SparseMatrix)> {
    let mut jac = sparsity_pattern(mesh, space, space)?;
    let r = assemble_ns_into(&mut jac, mesh, space, problem, y, convection)?;
    Ok((r, jac))
}

pub(crate) fn assemble_ns_into(
    jac: &mut SparseMatrix,
    mesh: &Mesh,
    space: &TaylorHood,
    problem: &FlowProblem,
    y: &[f64],
    convection: bool,
) -> Result<Vec<f64>> {
    problem.validate()?;
    if y.len() != space.dof_count() {
        return Err(Error::Contract(format!(
            "flow state has {} entries, expected {}",
            y.len(),
            space.dof_count()
        )));
    }
    let nu = problem.nu;
    let conv = if convection { 1.0 } else { 0.0 };
    let q = quadrature_rule(FLOW_QUADRATURE)?;
    let mut r = vec![0.0; space.dof_count()];
    jac.set_zero();
    let mut block = [0.0; 225];
    let mut local_r = [0.0; 15];
    for t in 0..mesh.n_triangles() {
        let e = Element::new(mesh, t)?;
        let y_loc = gather(space, y, t);
        block.fill(0.0);
        local_r.fill(0.0);
        for pd in point_data(&e, &q) {
            let (v, gv, p) = fields(&pd, &y_loc);
            let w = pd.weight;
            let f = problem.forcing.as_ref().map_or([0.0; 2], |f| f(pd.x));
            let div = gv[0][0] + gv[1][1];
            let adv = [gv[0][0] * v[0] + gv[0][1] * v[1], gv[1][0] * v[0] + gv[1][1] * v[1]];
            for i in 0..6 {
                for k in 0..2 {
                    let row = 2 * i + k;
                    local_r[row] += w
                        * (nu * (gv[k][0] * pd.dphi[i][0] + gv[k][1] * pd.dphi[i][1])
                            + conv * adv[k] * pd.phi[i]
                            - p * pd.dphi[i][k]
                            - f[k] * pd.phi[i]);
                    for m in 0..6 {
                        let lap = pd.dphi[m][0] * pd.dphi[i][0] + pd.dphi[m][1] * pd.dphi[i][1];
                        let vgrad = v[0] * pd.dphi[m][0] + v[1] * pd.dphi[m][1];
                        for l in 0..2 {
                            let mut val = conv * pd.phi[m] * gv[k][l] * pd.phi[i];
                            if k == l {
                                val += nu * lap + conv * vgrad * pd.phi[i];
                            }
                            block[15 * row + 2 * m + l] += w * val;
                        }
                    }
                    for b in 0..3 {
                        block[15 * row + 12 + b] -= w * pd.psi[b] * pd.dphi[i][k];
                    }
                }
            }
            for a in 0..3 {
                local_r[12 + a] -= w * pd.psi[a] * div;
                for m in 0..6 {
                    for l in 0..2 {
                        block[15 * (12 + a) + 2 * m + l] -= w * pd.psi[a] * pd.dphi[m][l];
                    }
                }
            }
        }
        if block.iter().chain(&local_r).any(|v| !v.is_finite()) {
            return Err(Error::Assembly { element: t });
        }
        let dofs = space.cell_dofs(t);
        jac.add_local(dofs, dofs, &block)?;
        for (&d, v) in dofs.iter().zip(&local_r) {
            r[d] += v;
        }
    }
    if let Some(h) = &problem.traction {
        add_outflow_traction(mesh, h.as_ref(), &mut r)?;
    }
    Ok(r)
}

/// Subtracts `int_out h.w` using the quadratic trace on each outflow edge.
fn add_outflow_traction(mesh: &Mesh, h: &(dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync), r: &mut [f64]) -> Result<()> {
    let n = mesh.n_nodes();
    let table = mesh.edge_table();
    // Three-point Gauss rule on [0, 1].
    let s15 = (0.6f64).sqrt();
    let gauss = [(0.5 * (1.0 - s15), 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 * (1.0 + s15), 5.0 / 18.0)];
    for (e, m) in table.edge_markers.iter().enumerate() {
        if *m != Some(Marker::Outflow) {
            continue;
        }
        let [a, b] = table.edges[e];
        let (pa, pb) = (mesh.nodes()[a], mesh.nodes()[b]);
        let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        let dofs = [a, n + e, b];
        for (s, w) in gauss {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let hv = h(x);
            let phi = [(1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s), s * (2.0 * s - 1.0)];
            for (ent, ph) in dofs.iter().zip(phi) {
                for c in 0..2 {
                    r[2 * ent + c] -= w * len * hv[c] * ph;
                }
            }
        }
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("outflow traction produced non-finite values".into()));
    }
    Ok(())
}
