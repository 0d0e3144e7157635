use super::assemble::Element;
use super::basis::{p2_gradients, p2_values};
use super::space::{FunctionSpace, SpaceKind};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Value and gradient (`gradient[c][j] = d u_c / d x_j`) of a field at a
/// point; scalar fields use component 0 only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue {
    pub value: [f64; 2],
    pub gradient: [[f64; 2]; 2],
}

pub fn evaluate_field(
    mesh: &Mesh,
    space: &FunctionSpace,
    coefficients: &[f64],
    triangle: usize,
    barycentric: [f64; 3],
) -> Result<FieldValue> {
    if triangle >= mesh.n_triangles() {
        return Err(Error::Contract(format!(
            "triangle {triangle} out of range ({} triangles)",
            mesh.n_triangles()
        )));
    }
    if coefficients.len() != space.dof_count() {
        return Err(Error::Contract(format!(
            "{} coefficients for a space with {} dofs",
            coefficients.len(),
            space.dof_count()
        )));
    }
    let element = Element::new(mesh, triangle)?;
    let g = element.geometry.barycentric_gradients();
    let dofs = space.cell_dofs(triangle);
    let mut out = FieldValue { value: [0.0; 2], gradient: [[0.0; 2]; 2] };
    let nc = space.components();
    let mut add = |basis: usize, phi: f64, grad: [f64; 2]| {
        for c in 0..nc {
            let u = coefficients[dofs[nc * basis + c]];
            out.value[c] += u * phi;
            out.gradient[c][0] += u * grad[0];
            out.gradient[c][1] += u * grad[1];
        }
    };
    match space.kind() {
        SpaceKind::P1Scalar | SpaceKind::P1Vector => {
            for i in 0..3 {
                add(i, barycentric[i], g[i]);
            }
        }
        SpaceKind::P2Vector => {
            let v = p2_values(barycentric);
            let dv = p2_gradients(barycentric, &g);
            for i in 0..6 {
                add(i, v[i], dv[i]);
            }
        }
    }
    Ok(out)
}

/// Nodal interpolation of `f` into a vector space (P1 or P2).
pub fn interpolate_vector(mesh: &Mesh, space: &FunctionSpace, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let mut out = vec![0.0; space.dof_count()];
    for (i, p) in mesh.nodes().iter().enumerate() {
        let v = f(*p);
        out[2 * i] = v[0];
        out[2 * i + 1] = v[1];
    }
    if space.kind() == SpaceKind::P2Vector {
        let n = mesh.n_nodes();
        for (e, [a, b]) in mesh.edge_table().edges.iter().enumerate() {
            let (p, q) = (mesh.nodes()[*a], mesh.nodes()[*b]);
            let v = f([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            out[2 * (n + e)] = v[0];
            out[2 * (n + e) + 1] = v[1];
        }
    }
    out
}

/// Nodal interpolation of a scalar function into P1.
pub fn interpolate_scalar(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    mesh.nodes().iter().map(|p| f(*p)).collect()
}
