//! Unstructured triangle meshes with boundary markers.
//!
//! A [`Mesh`] stores node coordinates, counterclockwise triangles and the
//! marked boundary edges. Topology is fixed after construction; only node
//! coordinates may change (through [`GridHierarchy::apply_deformation`]).

mod generate;
mod hierarchy;
mod msh;
mod polygon;
mod quality;
mod vtk;

use std::collections::HashMap;

pub use generate::{generate_benchmark_mesh, rectangle_mesh, RectangleMarkers};
pub use hierarchy::{GridHierarchy, ParentEntity};
pub use msh::{read_msh, read_msh_str, MarkerMap};
pub use polygon::{obstacle_polygon, symmetric_difference_area, Polygon};
pub use quality::{quality_report, triangle_quality, QualityReport, TriangleQuality};
pub use vtk::{write_vtk, NodalField};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Boundary part a boundary edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Marker {
    Inflow,
    Outflow,
    Wall,
    Obstacle,
}

impl Marker {
    pub const ALL: [Marker; 4] = [Marker::Inflow, Marker::Outflow, Marker::Wall, Marker::Obstacle];

    pub fn name(self) -> &'static str {
        match self {
            Marker::Inflow => "inflow",
            Marker::Outflow => "outflow",
            Marker::Wall => "wall",
            Marker::Obstacle => "obstacle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub marker: Marker,
}

/// Edge numbering of a triangulation. Local edge `k` of a triangle is the
/// edge opposite to its local vertex `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeTable {
    /// End points of each edge, smaller node id first.
    pub edges: Vec<[usize; 2]>,
    pub triangle_edges: Vec<[usize; 3]>,
    /// Marker of each edge if it lies on the boundary.
    pub edge_markers: Vec<Option<Marker>>,
}

impl EdgeTable {
    fn build(n_nodes: usize, triangles: &[[usize; 3]], boundary: &[BoundaryEdge]) -> Result<Self> {
        let mut lookup: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges = Vec::new();
        let mut counts: Vec<u8> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                if a >= n_nodes || b >= n_nodes {
                    return Err(Error::Topology(format!(
                        "triangle {t} references node outside 0..{n_nodes}"
                    )));
                }
                let key = sorted_pair(a, b);
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(key);
                    counts.push(0);
                    edges.len() - 1
                });
                counts[id] += 1;
                if counts[id] > 2 {
                    return Err(Error::Topology(format!(
                        "edge ({}, {}) shared by more than two triangles",
                        key[0], key[1]
                    )));
                }
                local[k] = id;
            }
            triangle_edges.push(local);
        }

        let mut edge_markers = vec![None; edges.len()];
        for be in boundary {
            let key = sorted_pair(be.nodes[0], be.nodes[1]);
            let id = *lookup.get(&key).ok_or_else(|| {
                Error::Topology(format!(
                    "marked boundary edge ({}, {}) is not an edge of the triangulation",
                    key[0], key[1]
                ))
            })?;
            if counts[id] != 1 {
                return Err(Error::Topology(format!(
                    "marked boundary edge ({}, {}) is interior",
                    key[0], key[1]
                )));
            }
            if edge_markers[id].is_some() {
                return Err(Error::Topology(format!(
                    "boundary edge ({}, {}) marked twice",
                    key[0], key[1]
                )));
            }
            edge_markers[id] = Some(be.marker);
        }
        if let Some(id) = (0..edges.len()).find(|&e| counts[e] == 1 && edge_markers[e].is_none()) {
            return Err(Error::Topology(format!(
                "boundary edge ({}, {}) carries no marker",
                edges[id][0], edges[id][1]
            )));
        }

        Ok(EdgeTable {
            edges,
            triangle_edges,
            edge_markers,
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Signed area of the triangle `(a, b, c)`; positive for counterclockwise order.
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    edge_table: EdgeTable,
}

impl Mesh {
    /// Builds a mesh and checks orientation, conformity and the boundary
    /// marker partition.
    pub fn new(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let edge_table = EdgeTable::build(nodes.len(), &triangles, &boundary_edges)?;
        let mesh = Mesh {
            nodes,
            triangles,
            boundary_edges,
            edge_table,
        };
        if let Some((t, area)) = mesh.first_non_positive(&mesh.nodes) {
            return Err(Error::Topology(format!(
                "triangle {t} has non-positive signed area {area:e}"
            )));
        }
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn edge_table(&self) -> &EdgeTable {
        &self.edge_table
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_table.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    /// Sum of all triangle areas.
    pub fn area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Nodes lying on at least one boundary edge with a marker in `markers`.
    pub fn nodes_on(&self, markers: &[Marker]) -> Vec<bool> {
        let mut flags = vec![false; self.n_nodes()];
        for be in &self.boundary_edges {
            if markers.contains(&be.marker) {
                flags[be.nodes[0]] = true;
                flags[be.nodes[1]] = true;
            }
        }
        flags
    }

    /// Number of boundary edges per marker, in [`Marker::ALL`] order.
    pub fn marker_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for be in &self.boundary_edges {
            counts[Marker::ALL.iter().position(|m| *m == be.marker).unwrap()] += 1;
        }
        counts
    }

    /// First triangle whose signed area would be non-positive with the given
    /// coordinates.
    pub(crate) fn first_non_positive(&self, coords: &[Point]) -> Option<(usize, f64)> {
        self.triangles.iter().enumerate().find_map(|(t, &[a, b, c])| {
            let area = signed_area(coords[a], coords[b], coords[c]);
            (area.is_nan() || area <= 0.0).then_some((t, area))
        })
    }

    pub(crate) fn set_nodes(&mut self, nodes: Vec<Point>) {
        debug_assert_eq!(nodes.len(), self.nodes.len());
        self.nodes = nodes;
    }

    /// Signed area of the closed loop formed by all boundary edges, using
    /// the orientation induced by the triangles (domain on the left).
    pub fn boundary_shoelace_area(&self) -> f64 {
        let orientation = self.oriented_boundary_edges();
        orientation
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (self.nodes[a], self.nodes[b]);
                0.5 * (p[0] * q[1] - q[0] * p[1])
            })
            .sum()
    }

    /// Boundary edges oriented so that the adjacent triangle lies on the left.
    pub fn oriented_boundary_edges(&self) -> Vec<[usize; 2]> {
        let mut owner: HashMap<[usize; 2], [usize; 2]> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                owner.insert(sorted_pair(a, b), [a, b]);
            }
        }
        self.boundary_edges
            .iter()
            .map(|be| owner[&sorted_pair(be.nodes[0], be.nodes[1])])
            .collect()
    }
}
