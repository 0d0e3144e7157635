use std::collections::HashMap;

use super::{Marker, Mesh, Point};
use crate::error::{Error, Result};

/// Closed counterclockwise loop of points; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    points: Vec<Point>,
}

impl Polygon {
    /// Builds a polygon, reversing the loop if it is clockwise.
    pub fn new(mut points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Contract(format!(
                "polygon needs at least 3 vertices, got {}",
                points.len()
            )));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Contract("polygon has non-finite vertices".into()));
        }
        let area = shoelace(&points);
        if area == 0.0 {
            return Err(Error::Contract("polygon has zero area".into()));
        }
        if area < 0.0 {
            points.reverse();
        }
        Ok(Polygon { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Enclosed area (positive).
    pub fn area(&self) -> f64 {
        shoelace(&self.points)
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, p: Point) -> bool {
        let n = self.points.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.points[i], self.points[j]);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.points {
            for c in 0..2 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        (lo, hi)
    }
}

fn shoelace(points: &[Point]) -> f64 {
    let n = points.len();
    0.5 * (0..n)
        .map(|i| {
            let (p, q) = (points[i], points[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

/// Chains the obstacle boundary edges into one counterclockwise loop.
pub fn obstacle_polygon(mesh: &Mesh) -> Result<Polygon> {
    let edges: Vec<[usize; 2]> = mesh
        .boundary_edges()
        .iter()
        .filter(|e| e.marker == Marker::Obstacle)
        .map(|e| e.nodes)
        .collect();
    if edges.is_empty() {
        return Err(Error::Topology("mesh has no obstacle boundary".into()));
    }
    let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
    for &[a, b] in &edges {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    if let Some((node, nb)) = adjacency.iter().find(|(_, nb)| nb.len() != 2) {
        return Err(Error::Topology(format!(
            "obstacle boundary is not a closed loop: node {node} has {} obstacle neighbours",
            nb.len()
        )));
    }

    let start = edges[0][0];
    let mut loop_nodes = vec![start];
    let mut prev = start;
    let mut current = edges[0][1];
    while current != start {
        loop_nodes.push(current);
        let nb = &adjacency[&current];
        let next = if nb[0] != prev { nb[0] } else { nb[1] };
        prev = current;
        current = next;
        if loop_nodes.len() > edges.len() {
            return Err(Error::Topology("obstacle boundary chain does not close".into()));
        }
    }
    if loop_nodes.len() != edges.len() {
        return Err(Error::Topology(format!(
            "obstacle boundary has several loops ({} of {} edges in the first)",
            loop_nodes.len(),
            edges.len()
        )));
    }
    Polygon::new(loop_nodes.iter().map(|&i| mesh.nodes()[i]).collect())
}

/// `|a \ b| + |b \ a|` estimated by cell-centre sampling on a regular
/// `samples_per_axis^2` grid over the joint bounding box.
///
/// Only cells cut by a polygon edge can be misclassified, so the error is
/// bounded by `cell_area * (cells crossed by either boundary)`, roughly
/// `cell_diameter * (perimeter(a) + perimeter(b))`.
pub fn symmetric_difference_area(a: &Polygon, b: &Polygon, samples_per_axis: usize) -> Result<f64> {
    if samples_per_axis < 100 {
        return Err(Error::Contract(format!(
            "need at least 100 samples per axis, got {samples_per_axis}"
        )));
    }
    let (lo_a, hi_a) = a.bounding_box();
    let (lo_b, hi_b) = b.bounding_box();
    let lo = [lo_a[0].min(lo_b[0]), lo_a[1].min(lo_b[1])];
    let hi = [hi_a[0].max(hi_b[0]), hi_a[1].max(hi_b[1])];
    let n = samples_per_axis;
    let dx = (hi[0] - lo[0]) / n as f64;
    let dy = (hi[1] - lo[1]) / n as f64;
    let mut count = 0usize;
    for j in 0..n {
        let y = lo[1] + (j as f64 + 0.5) * dy;
        for i in 0..n {
            let p = [lo[0] + (i as f64 + 0.5) * dx, y];
            if a.contains(p) != b.contains(p) {
                count += 1;
            }
        }
    }
    Ok(count as f64 * dx * dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_benchmark_mesh, BoundaryEdge};

    fn square(x0: f64, y0: f64) -> Polygon {
        Polygon::new(vec![[x0, y0], [x0 + 1.0, y0], [x0 + 1.0, y0 + 1.0], [x0, y0 + 1.0]]).unwrap()
    }

    #[test]
    fn identical_is_zero() {
        let a = square(0.0, 0.0);
        assert_eq!(symmetric_difference_area(&a, &a, 200).unwrap(), 0.0);
    }

    #[test]
    fn shifted_square() {
        let d = symmetric_difference_area(&square(0.0, 0.0), &square(0.5, 0.0), 1000).unwrap();
        assert!((d - 1.0).abs() < 0.02, "{d}");
    }

    #[test]
    fn disjoint_squares() {
        let d = symmetric_difference_area(&square(0.0, 0.0), &square(3.0, 0.0), 1000).unwrap();
        assert!((d - 2.0).abs() < 0.04, "{d}");
    }

    #[test]
    fn degenerate_polygon_rejected() {
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        let a = square(0.0, 0.0);
        assert!(symmetric_difference_area(&a, &a, 99).is_err());
    }

    #[test]
    fn benchmark_obstacle_area() {
        let h = generate_benchmark_mesh(20.0, 6.0, 0.4, 8).unwrap();
        let p = obstacle_polygon(h.finest()).unwrap();
        assert!((p.area() - 0.16).abs() < 1e-12);
        assert_eq!(p.points().len(), 32);
    }

    #[test]
    fn open_chain_is_topology_error() {
        let h = generate_benchmark_mesh(20.0, 6.0, 0.4, 4).unwrap();
        let m = h.finest();
        let mut boundary: Vec<BoundaryEdge> = m.boundary_edges().to_vec();
        let pos = boundary.iter().position(|e| e.marker == Marker::Obstacle).unwrap();
        // Relabel one obstacle edge so the obstacle chain is open.
        boundary[pos].marker = Marker::Wall;
        let broken = Mesh::new(m.nodes().to_vec(), m.triangles().to_vec(), boundary).unwrap();
        assert!(matches!(obstacle_polygon(&broken), Err(Error::Topology(_))));
    }
}
