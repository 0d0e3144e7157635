use super::{BoundaryEdge, Mesh, Point};
use crate::error::{Error, Result};

/// Where a node of a refined level comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParentEntity {
    /// Copy of the coarse node with this id.
    Node(usize),
    /// Midpoint of the coarse edge with these end points.
    EdgeMidpoint([usize; 2]),
}

/// Stack of uniformly (red) refined meshes, coarsest first.
///
/// Node `i` of level `k` is node `i` of level `k + 1`; the refined level
/// appends one node per coarse edge. Deformations computed on the finest
/// level are injected into the coarser ones through this identity.
#[derive(Debug, Clone)]
pub struct GridHierarchy {
    levels: Vec<Mesh>,
    parents: Vec<Vec<ParentEntity>>,
}

impl GridHierarchy {
    pub fn new(base: Mesh) -> Self {
        GridHierarchy {
            levels: vec![base],
            parents: Vec::new(),
        }
    }

    pub fn levels(&self) -> &[Mesh] {
        &self.levels
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &Mesh {
        self.levels.last().expect("hierarchy has at least one level")
    }

    pub fn coarsest(&self) -> &Mesh {
        &self.levels[0]
    }

    /// Parent map of level `k` (`k >= 1`): one entry per fine node.
    pub fn parents(&self, level: usize) -> Option<&[ParentEntity]> {
        level.checked_sub(1).and_then(|k| self.parents.get(k)).map(Vec::as_slice)
    }

    /// Adds one level by red refinement of the current finest mesh.
    pub fn refine_uniform(&mut self) -> Result<()> {
        let coarse = self.finest();
        let n = coarse.n_nodes();
        let table = coarse.edge_table();

        let mut nodes = coarse.nodes().to_vec();
        let mut parents: Vec<ParentEntity> = (0..n).map(ParentEntity::Node).collect();
        for &[a, b] in &table.edges {
            let (p, q) = (coarse.nodes()[a], coarse.nodes()[b]);
            nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            parents.push(ParentEntity::EdgeMidpoint([a, b]));
        }

        let mut triangles = Vec::with_capacity(4 * coarse.n_triangles());
        for (tri, edges) in coarse.triangles().iter().zip(&table.triangle_edges) {
            let [a, b, c] = *tri;
            // Local edge k is opposite vertex k.
            let m_bc = n + edges[0];
            let m_ca = n + edges[1];
            let m_ab = n + edges[2];
            triangles.push([a, m_ab, m_ca]);
            triangles.push([m_ab, b, m_bc]);
            triangles.push([m_ca, m_bc, c]);
            triangles.push([m_ab, m_bc, m_ca]);
        }

        let edge_index: std::collections::HashMap<[usize; 2], usize> = table
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (*e, n + i))
            .collect();
        let mut boundary = Vec::with_capacity(2 * coarse.boundary_edges().len());
        for be in coarse.boundary_edges() {
            let [a, b] = be.nodes;
            let key = if a < b { [a, b] } else { [b, a] };
            // Marked edges are edges of the triangulation, checked by Mesh::new.
            let mid = edge_index[&key];
            boundary.push(BoundaryEdge { nodes: [a, mid], marker: be.marker });
            boundary.push(BoundaryEdge { nodes: [mid, b], marker: be.marker });
        }

        let fine = Mesh::new(nodes, triangles, boundary)?;
        self.levels.push(fine);
        self.parents.push(parents);
        Ok(())
    }

    /// Current coordinates of every level, coarsest first.
    pub fn coordinates(&self) -> Vec<Vec<Point>> {
        self.levels.iter().map(|m| m.nodes().to_vec()).collect()
    }

    /// Restores coordinates previously taken with [`Self::coordinates`].
    pub fn restore_coordinates(&mut self, saved: Vec<Vec<Point>>) -> Result<()> {
        if saved.len() != self.levels.len()
            || saved.iter().zip(&self.levels).any(|(s, m)| s.len() != m.n_nodes())
        {
            return Err(Error::Contract("saved coordinates do not match the hierarchy".into()));
        }
        for (mesh, coords) in self.levels.iter_mut().zip(saved) {
            mesh.set_nodes(coords);
        }
        Ok(())
    }

    /// Moves every finest-level node `x` to `x + u(x)` and every coarser node
    /// by the displacement of its coincident fine node (injection).
    ///
    /// `u` holds interleaved components, `u[2 i + c]`. On tangling no level
    /// is modified.
    pub fn apply_deformation(&mut self, u: &[f64]) -> Result<()> {
        let fine = self.finest();
        if u.len() != 2 * fine.n_nodes() {
            return Err(Error::Contract(format!(
                "deformation has {} entries, expected {}",
                u.len(),
                2 * fine.n_nodes()
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("deformation contains non-finite values".into()));
        }
        let mut moved = Vec::with_capacity(self.levels.len());
        for (level, mesh) in self.levels.iter().enumerate() {
            let coords: Vec<Point> = mesh
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, x)| [x[0] + u[2 * i], x[1] + u[2 * i + 1]])
                .collect();
            if let Some((element, area)) = mesh.first_non_positive(&coords) {
                return Err(Error::Tangling { level, element, area });
            }
            moved.push(coords);
        }
        for (mesh, coords) in self.levels.iter_mut().zip(moved) {
            mesh.set_nodes(coords);
        }
        Ok(())
    }

    /// Largest distance between a coarse node and its coincident fine node
    /// over all consecutive level pairs.
    pub fn max_level_mismatch(&self) -> f64 {
        self.levels
            .windows(2)
            .flat_map(|pair| {
                pair[0].nodes().iter().zip(pair[1].nodes()).map(|(c, f)| {
                    (c[0] - f[0]).abs().max((c[1] - f[1]).abs())
                })
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_benchmark_mesh, quality_report, BoundaryEdge, Marker};

    fn two_triangles() -> GridHierarchy {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let boundary = vec![
            BoundaryEdge { nodes: [0, 1], marker: Marker::Wall },
            BoundaryEdge { nodes: [1, 2], marker: Marker::Outflow },
            BoundaryEdge { nodes: [2, 3], marker: Marker::Wall },
            BoundaryEdge { nodes: [3, 0], marker: Marker::Inflow },
        ];
        GridHierarchy::new(Mesh::new(nodes, vec![[0, 1, 2], [0, 2, 3]], boundary).unwrap())
    }

    #[test]
    fn refine_two_triangles() {
        let mut h = two_triangles();
        h.refine_uniform().unwrap();
        let f = h.finest();
        assert_eq!(f.n_triangles(), 8);
        assert_eq!(f.n_nodes(), 9);
        assert_eq!(f.boundary_edges().len(), 8);
        assert!((f.area() - 1.0).abs() < 1e-15);
        assert_eq!(h.parents(1).unwrap()[0], ParentEntity::Node(0));
    }

    #[test]
    fn refinement_keeps_angles_and_doubles_markers() {
        let mut h = generate_benchmark_mesh(20.0, 6.0, 0.4, 8).unwrap();
        let q0 = quality_report(h.finest());
        let c0 = h.finest().marker_counts();
        let t0 = h.finest().n_triangles();
        h.refine_uniform().unwrap();
        h.refine_uniform().unwrap();
        let q2 = quality_report(h.finest());
        assert_eq!(h.finest().n_triangles(), 16 * t0);
        assert!((q0.min_angle - q2.min_angle).abs() < 1e-12);
        assert!((q0.max_angle - q2.max_angle).abs() < 1e-12);
        let c2 = h.finest().marker_counts();
        for k in 0..4 {
            assert_eq!(c2[k], 4 * c0[k]);
        }
    }

    #[test]
    fn boundary_midpoints_on_parent_edge() {
        let mut h = generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        h.refine_uniform().unwrap();
        let f = h.finest();
        for be in f.boundary_edges() {
            if let ParentEntity::EdgeMidpoint([a, b]) = h.parents(1).unwrap()[be.nodes[1]] {
                let (p, q, m) = (f.nodes()[a], f.nodes()[b], f.nodes()[be.nodes[1]]);
                let cross = (q[0] - p[0]) * (m[1] - p[1]) - (q[1] - p[1]) * (m[0] - p[0]);
                assert!(cross.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_deformation_is_identity() {
        let mut h = generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        h.refine_uniform().unwrap();
        let before = h.coordinates();
        let n = h.finest().n_nodes();
        h.apply_deformation(&vec![0.0; 2 * n]).unwrap();
        assert_eq!(before, h.coordinates());
    }

    #[test]
    fn deformation_round_trip_and_injection() {
        let mut h = generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        h.refine_uniform().unwrap();
        let before = h.coordinates();
        let fine = h.finest();
        let fixed = fine.nodes_on(&[Marker::Inflow, Marker::Outflow, Marker::Wall]);
        let u: Vec<f64> = (0..2 * fine.n_nodes())
            .map(|i| {
                let x = fine.nodes()[i / 2];
                if fixed[i / 2] {
                    0.0
                } else {
                    0.01 * (x[0] * 0.7 + (i % 2) as f64).sin() * (-x[0] * x[0] - x[1] * x[1]).exp()
                }
            })
            .collect();
        h.apply_deformation(&u).unwrap();
        assert_eq!(h.max_level_mismatch(), 0.0);
        let minus: Vec<f64> = u.iter().map(|v| -v).collect();
        h.apply_deformation(&minus).unwrap();
        for (lb, la) in before.iter().zip(h.coordinates()) {
            for (p, q) in lb.iter().zip(&la) {
                assert!((p[0] - q[0]).abs() <= 1e-14 && (p[1] - q[1]).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn tangling_leaves_hierarchy_untouched() {
        let mut h = generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        h.refine_uniform().unwrap();
        let before = h.coordinates();
        let fine = h.finest();
        let obstacle = fine.nodes_on(&[Marker::Obstacle]);
        // Shift larger than the first ring spacing (about 0.1) flips the first ring.
        let delta = 1.0;
        let u: Vec<f64> = (0..2 * fine.n_nodes())
            .map(|i| if obstacle[i / 2] && i % 2 == 0 { delta } else { 0.0 })
            .collect();
        let err = h.apply_deformation(&u).unwrap_err();
        assert!(matches!(err, Error::Tangling { .. }));
        assert_eq!(before, h.coordinates());
    }
}
