use crate::error::{Error, Result};
use crate::fem::{element_geometry, quadrature_rule};
use crate::mesh::{Marker, Mesh};

/// Per-element quantities of `F = id + u` for a P1 displacement `u`
/// (interleaved dofs `2 node + c`). `Du` is constant on each element.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kinematics {
    pub area: f64,
    /// Barycentric gradients on the undeformed element.
    pub grad: [[f64; 2]; 3],
    pub dofs: [usize; 6],
    /// `du[c][j] = d u_c / d x_j`.
    pub du: [[f64; 2]; 2],
    /// `Du : Du`.
    pub s: f64,
    pub det: f64,
    /// Centroid value of `x + u`.
    pub xu: [f64; 2],
    /// `t[a][k] = tr(DF^{-1} (e_k (x) grad phi_a))`.
    pub t: [[f64; 2]; 3],
}

impl Kinematics {
    pub fn new(mesh: &Mesh, u: &[f64], element: usize) -> Result<Self> {
        let tri = mesh.triangles()[element];
        let pts = mesh.triangle_points(element);
        let geo = element_geometry(pts)?;
        let grad = geo.barycentric_gradients();
        let dofs = [2 * tri[0], 2 * tri[0] + 1, 2 * tri[1], 2 * tri[1] + 1, 2 * tri[2], 2 * tri[2] + 1];
        let mut du = [[0.0; 2]; 2];
        let mut xu = [0.0; 2];
        for a in 0..3 {
            for c in 0..2 {
                let ua = u[dofs[2 * a + c]];
                du[c][0] += ua * grad[a][0];
                du[c][1] += ua * grad[a][1];
                xu[c] += (pts[a][c] + ua) / 3.0;
            }
        }
        let s = du[0][0].powi(2) + du[0][1].powi(2) + du[1][0].powi(2) + du[1][1].powi(2);
        let f = [[1.0 + du[0][0], du[0][1]], [du[1][0], 1.0 + du[1][1]]];
        let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
        if !(det > 0.0) {
            return Err(Error::SingularConfiguration { element, det });
        }
        let minv = [[f[1][1] / det, -f[0][1] / det], [-f[1][0] / det, f[0][0] / det]];
        let mut t = [[0.0; 2]; 3];
        for a in 0..3 {
            for k in 0..2 {
                t[a][k] = minv[0][k] * grad[a][0] + minv[1][k] * grad[a][1];
            }
        }
        Ok(Kinematics { area: geo.area(), grad, dofs, du, s, det, xu, t })
    }

    /// `Du : D(phi_a e_k)`.
    pub fn m(&self, a: usize, k: usize) -> f64 {
        self.du[k][0] * self.grad[a][0] + self.du[k][1] * self.grad[a][1]
    }

    /// `grad phi_a . grad phi_b`.
    pub fn gg(&self, a: usize, b: usize) -> f64 {
        self.grad[a][0] * self.grad[b][0] + self.grad[a][1] * self.grad[b][1]
    }
}

pub(crate) fn check_len(mesh: &Mesh, u: &[f64]) -> Result<()> {
    if u.len() != 2 * mesh.n_nodes() {
        return Err(Error::Contract(format!(
            "displacement has {} entries, expected {}",
            u.len(),
            2 * mesh.n_nodes()
        )));
    }
    Ok(())
}

/// Dofs fixed to zero: both components on inflow, outflow and wall nodes.
pub fn fixed_dofs(mesh: &Mesh) -> Vec<usize> {
    let fixed = mesh.nodes_on(&[Marker::Inflow, Marker::Outflow, Marker::Wall]);
    (0..2 * mesh.n_nodes()).filter(|d| fixed[d / 2]).collect()
}

/// `g = (int (x_1 + u_1) det DF, int (x_2 + u_2) det DF, int (det DF - 1))`
/// over the undeformed mesh, i.e. the first moments and the volume change
/// of the deformed domain.
pub fn constraint_values(mesh: &Mesh, u: &[f64]) -> Result<[f64; 3]> {
    check_len(mesh, u)?;
    let mut g = [0.0; 3];
    for e in 0..mesh.n_triangles() {
        let k = Kinematics::new(mesh, u, e)?;
        g[0] += k.area * k.det * k.xu[0];
        g[1] += k.area * k.det * k.xu[1];
        g[2] += k.area * (k.det - 1.0);
    }
    Ok(g)
}

/// `(int |u|^p)^{1/p} + (int (Du:Du)^{p/2})^{1/p}`. The gradient part is
/// exact for P1; the value part uses a rule of degree `ceil(p) + 1` (at most 10).
pub fn w1p_norm(mesh: &Mesh, u: &[f64], p: f64) -> Result<f64> {
    check_len(mesh, u)?;
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("W1p norm needs p >= 1, got {p}")));
    }
    let q = quadrature_rule(((p.ceil() as usize) + 1).min(10))?;
    let (mut lp, mut grad) = (0.0, 0.0);
    for e in 0..mesh.n_triangles() {
        let tri = mesh.triangles()[e];
        let geo = element_geometry(mesh.triangle_points(e))?;
        let g = geo.barycentric_gradients();
        let mut du = [[0.0; 2]; 2];
        for (a, &n) in tri.iter().enumerate() {
            for c in 0..2 {
                du[c][0] += u[2 * n + c] * g[a][0];
                du[c][1] += u[2 * n + c] * g[a][1];
            }
        }
        let s: f64 = du.iter().flatten().map(|v| v * v).sum();
        grad += geo.area() * s.powf(0.5 * p);
        for (l, w) in q.points.iter().zip(&q.weights) {
            let mut v = [0.0; 2];
            for (a, &n) in tri.iter().enumerate() {
                v[0] += l[a] * u[2 * n];
                v[1] += l[a] * u[2 * n + 1];
            }
            lp += w * geo.area() * (v[0] * v[0] + v[1] * v[1]).powf(0.5 * p);
        }
    }
    Ok(lp.powf(1.0 / p) + grad.powf(1.0 / p))
}
