use super::geometry::{element_geometry, ElementGeometry};
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Per-triangle dof numbering consumed by the assembly loops.
pub trait DofMap {
    fn dof_count(&self) -> usize;
    fn local_size(&self) -> usize;
    fn cell_dofs(&self, triangle: usize) -> &[usize];
}

impl DofMap for super::FunctionSpace {
    fn dof_count(&self) -> usize {
        self.dof_count()
    }
    fn local_size(&self) -> usize {
        self.local_size()
    }
    fn cell_dofs(&self, triangle: usize) -> &[usize] {
        self.cell_dofs(triangle)
    }
}

/// Element data handed to assembly kernels.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub index: usize,
    pub points: [Point; 3],
    pub geometry: ElementGeometry,
}

impl Element {
    pub fn new(mesh: &Mesh, index: usize) -> Result<Self> {
        let points = mesh.triangle_points(index);
        Ok(Element { index, points, geometry: element_geometry(points)? })
    }

    /// Physical point of barycentric coordinates `l`.
    pub fn map(&self, l: [f64; 3]) -> Point {
        let p = &self.points;
        [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ]
    }
}

/// Zero matrix whose pattern couples every row dof with every column dof of
/// the same triangle.
pub fn sparsity_pattern(mesh: &Mesh, rows: &impl DofMap, cols: &impl DofMap) -> Result<SparseMatrix> {
    let mut pattern = vec![Vec::new(); rows.dof_count()];
    for t in 0..mesh.n_triangles() {
        let cd = cols.cell_dofs(t);
        for &r in rows.cell_dofs(t) {
            pattern[r].extend_from_slice(cd);
        }
    }
    SparseMatrix::from_pattern(rows.dof_count(), cols.dof_count(), pattern)
}

/// Sums row-major local blocks `kernel(element, block)` into a new matrix.
pub fn assemble_operator<F>(
    mesh: &Mesh,
    rows: &impl DofMap,
    cols: &impl DofMap,
    kernel: F,
) -> Result<SparseMatrix>
where
    F: FnMut(&Element, &mut [f64]) -> Result<()>,
{
    let mut m = sparsity_pattern(mesh, rows, cols)?;
    assemble_operator_into(&mut m, mesh, rows, cols, kernel)?;
    Ok(m)
}

/// As [`assemble_operator`], reusing the pattern of `matrix` (values reset).
pub fn assemble_operator_into<F>(
    matrix: &mut SparseMatrix,
    mesh: &Mesh,
    rows: &impl DofMap,
    cols: &impl DofMap,
    mut kernel: F,
) -> Result<()>
where
    F: FnMut(&Element, &mut [f64]) -> Result<()>,
{
    matrix.set_zero();
    let (nr, nc) = (rows.local_size(), cols.local_size());
    let mut block = vec![0.0; nr * nc];
    for t in 0..mesh.n_triangles() {
        let element = Element::new(mesh, t)?;
        block.fill(0.0);
        kernel(&element, &mut block)?;
        if block.iter().any(|v| !v.is_finite()) {
            return Err(Error::Assembly { element: t });
        }
        matrix.add_local(rows.cell_dofs(t), cols.cell_dofs(t), &block)?;
    }
    Ok(())
}

/// Sums local vectors `kernel(element, local)` into a global vector.
pub fn assemble_functional<F>(mesh: &Mesh, space: &impl DofMap, mut kernel: F) -> Result<Vec<f64>>
where
    F: FnMut(&Element, &mut [f64]) -> Result<()>,
{
    let mut out = vec![0.0; space.dof_count()];
    let mut local = vec![0.0; space.local_size()];
    for t in 0..mesh.n_triangles() {
        let element = Element::new(mesh, t)?;
        local.fill(0.0);
        kernel(&element, &mut local)?;
        if local.iter().any(|v| !v.is_finite()) {
            return Err(Error::Assembly { element: t });
        }
        for (&d, v) in space.cell_dofs(t).iter().zip(&local) {
            out[d] += v;
        }
    }
    Ok(out)
}
