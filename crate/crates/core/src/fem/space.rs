use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    P1Scalar,
    /// Interleaved components: dof `2 node + c`.
    P1Vector,
    /// Vertex and edge-midpoint entities; dof `2 entity + c` where entity ids
    /// are node ids followed by `n_nodes + edge`.
    P2Vector,
}

/// Geometric entity carrying a dof.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofEntity {
    Node(usize),
    Edge(usize),
}

/// Dof numbering of a Lagrange space on a fixed triangulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSpace {
    kind: SpaceKind,
    n_nodes: usize,
    n_edges: usize,
    local_size: usize,
    cell_dofs: Vec<usize>,
}

impl FunctionSpace {
    pub fn new(kind: SpaceKind, mesh: &Mesh) -> Self {
        let n_nodes = mesh.n_nodes();
        let n_edges = mesh.n_edges();
        let table = mesh.edge_table();
        let local_size = match kind {
            SpaceKind::P1Scalar => 3,
            SpaceKind::P1Vector => 6,
            SpaceKind::P2Vector => 12,
        };
        let mut cell_dofs = Vec::with_capacity(local_size * mesh.n_triangles());
        for (tri, edges) in mesh.triangles().iter().zip(&table.triangle_edges) {
            match kind {
                SpaceKind::P1Scalar => cell_dofs.extend_from_slice(tri),
                SpaceKind::P1Vector => {
                    for &v in tri {
                        cell_dofs.extend([2 * v, 2 * v + 1]);
                    }
                }
                SpaceKind::P2Vector => {
                    let entities = tri.iter().copied().chain(edges.iter().map(|e| n_nodes + e));
                    for e in entities {
                        cell_dofs.extend([2 * e, 2 * e + 1]);
                    }
                }
            }
        }
        FunctionSpace { kind, n_nodes, n_edges, local_size, cell_dofs }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dof_count(&self) -> usize {
        match self.kind {
            SpaceKind::P1Scalar => self.n_nodes,
            SpaceKind::P1Vector => 2 * self.n_nodes,
            SpaceKind::P2Vector => 2 * (self.n_nodes + self.n_edges),
        }
    }

    pub fn components(&self) -> usize {
        match self.kind {
            SpaceKind::P1Scalar => 1,
            _ => 2,
        }
    }

    /// Dofs per triangle; local index is `components * basis + component`.
    pub fn local_size(&self) -> usize {
        self.local_size
    }

    pub fn n_cells(&self) -> usize {
        self.cell_dofs.len() / self.local_size
    }

    pub fn cell_dofs(&self, triangle: usize) -> &[usize] {
        &self.cell_dofs[triangle * self.local_size..(triangle + 1) * self.local_size]
    }

    /// Geometric entity and component of a global dof.
    pub fn dof_entity(&self, dof: usize) -> Option<(DofEntity, usize)> {
        if dof >= self.dof_count() {
            return None;
        }
        match self.kind {
            SpaceKind::P1Scalar => Some((DofEntity::Node(dof), 0)),
            SpaceKind::P1Vector => Some((DofEntity::Node(dof / 2), dof % 2)),
            SpaceKind::P2Vector => {
                let e = dof / 2;
                let entity = if e < self.n_nodes {
                    DofEntity::Node(e)
                } else {
                    DofEntity::Edge(e - self.n_nodes)
                };
                Some((entity, dof % 2))
            }
        }
    }

    /// Dofs whose entity lies on a node with `flag[node]`; for P2 an edge dof
    /// is included when both end points are flagged and the edge is a
    /// boundary edge (`edge_flag`).
    pub fn dofs_where(&self, node_flag: &[bool], edge_flag: &[bool]) -> Vec<usize> {
        (0..self.dof_count())
            .filter(|&d| match self.dof_entity(d) {
                Some((DofEntity::Node(n), _)) => node_flag[n],
                Some((DofEntity::Edge(e), _)) => edge_flag[e],
                None => false,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{rectangle_mesh, RectangleMarkers};

    #[test]
    fn dof_counts() {
        let m = rectangle_mesh((0.0, 1.0), (0.0, 1.0), 3, 2, RectangleMarkers::default()).unwrap();
        let (n, e) = (m.n_nodes(), m.n_edges());
        assert_eq!(FunctionSpace::new(SpaceKind::P1Scalar, &m).dof_count(), n);
        assert_eq!(FunctionSpace::new(SpaceKind::P1Vector, &m).dof_count(), 2 * n);
        let p2 = FunctionSpace::new(SpaceKind::P2Vector, &m);
        assert_eq!(p2.dof_count(), 2 * (n + e));
        // Every dof maps to exactly one entity, and every dof is used by a cell.
        let mut used = vec![false; p2.dof_count()];
        for t in 0..m.n_triangles() {
            for &d in p2.cell_dofs(t) {
                used[d] = true;
            }
        }
        assert!(used.iter().all(|u| *u));
        assert_eq!(p2.dof_entity(2 * n + 1), Some((DofEntity::Edge(0), 1)));
        assert_eq!(p2.dof_entity(p2.dof_count()), None);
    }
}
