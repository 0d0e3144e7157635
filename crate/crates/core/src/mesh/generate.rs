//! Built-in structured meshers.
//!
//! The benchmark channel is meshed with an O-grid of square rings around the
//! obstacle, grown geometrically until the rings touch the channel walls,
//! and two uniform blocks that fill the channel up- and downstream.

use super::{signed_area, BoundaryEdge, GridHierarchy, Marker, Mesh, Point};
use crate::error::{Error, Result};

/// Meshes `[-length/2, length/2] x [-height/2, height/2]` minus the centered
/// square of edge `obstacle_edge`, with `n0` segments along each obstacle
/// side. Returns a one-level hierarchy.
pub fn generate_benchmark_mesh(
    length: f64,
    height: f64,
    obstacle_edge: f64,
    n0: usize,
) -> Result<GridHierarchy> {
    let finite = length.is_finite() && height.is_finite() && obstacle_edge.is_finite();
    if !finite || obstacle_edge <= 0.0 || obstacle_edge >= height || height > length {
        return Err(Error::Parameter(format!(
            "benchmark geometry needs 0 < H < height <= length, got H = {obstacle_edge}, height = {height}, length = {length}"
        )));
    }
    if n0 < 4 {
        return Err(Error::Parameter(format!("base resolution must be >= 4, got {n0}")));
    }

    let s0 = 0.5 * obstacle_edge;
    let s_end = 0.5 * height;
    let half_len = 0.5 * length;
    let ring_ratio_target = 1.0 + 2.0 / n0 as f64;
    let n_rings = ((s_end / s0).ln() / ring_ratio_target.ln()).ceil().max(1.0) as usize;
    let ratio = (s_end / s0).powf(1.0 / n_rings as f64);

    let per_ring = 4 * n0;
    let mut nodes: Vec<Point> = Vec::new();
    let mut ring_ids = Vec::with_capacity(n_rings + 1);
    for k in 0..=n_rings {
        let s = if k == n_rings { s_end } else { s0 * ratio.powi(k as i32) };
        let ids: Vec<usize> = (0..per_ring)
            .map(|j| {
                nodes.push(ring_point(s, j, n0));
                nodes.len() - 1
            })
            .collect();
        ring_ids.push(ids);
    }

    let mut triangles = Vec::new();
    for k in 0..n_rings {
        for j in 0..per_ring {
            let jn = (j + 1) % per_ring;
            let quad = [ring_ids[k][j], ring_ids[k][jn], ring_ids[k + 1][jn], ring_ids[k + 1][j]];
            push_quad(&nodes, quad, &mut triangles);
        }
    }

    let mut boundary = Vec::new();
    for j in 0..per_ring {
        let jn = (j + 1) % per_ring;
        boundary.push(BoundaryEdge {
            nodes: [ring_ids[0][j], ring_ids[0][jn]],
            marker: Marker::Obstacle,
        });
    }
    // Outermost ring: bottom side j in [0, n0), right [n0, 2n0), top [2n0, 3n0), left [3n0, 4n0).
    let outer = &ring_ids[n_rings];
    let has_blocks = s_end < half_len;
    for j in 0..per_ring {
        let jn = (j + 1) % per_ring;
        let marker = match j / n0 {
            0 | 2 => Some(Marker::Wall),
            1 => (!has_blocks).then_some(Marker::Outflow),
            _ => (!has_blocks).then_some(Marker::Inflow),
        };
        if let Some(marker) = marker {
            boundary.push(BoundaryEdge {
                nodes: [outer[j], outer[jn]],
                marker,
            });
        }
    }

    if has_blocks {
        let spacing = height / n0 as f64;
        let n_cols = ((half_len - s_end) / spacing).ceil().max(1.0) as usize;
        for side in [-1.0f64, 1.0] {
            // Column 0 is the interface with the ring, column n_cols the channel end.
            let mut grid = vec![vec![usize::MAX; n0 + 1]; n_cols + 1];
            for (r, id) in grid[0].iter_mut().enumerate() {
                let j = if side < 0.0 {
                    (3 * n0 + (n0 - r)) % per_ring
                } else {
                    n0 + r
                };
                *id = outer[j];
            }
            for (c, column) in grid.iter_mut().enumerate().skip(1) {
                let x = if c == n_cols {
                    side * half_len
                } else {
                    side * (s_end + (half_len - s_end) * c as f64 / n_cols as f64)
                };
                for (r, id) in column.iter_mut().enumerate() {
                    let y = if r == n0 { s_end } else { -s_end + spacing * r as f64 };
                    nodes.push([x, y]);
                    *id = nodes.len() - 1;
                }
            }
            for c in 0..n_cols {
                for r in 0..n0 {
                    let quad = [grid[c][r], grid[c + 1][r], grid[c + 1][r + 1], grid[c][r + 1]];
                    push_quad(&nodes, quad, &mut triangles);
                }
                boundary.push(BoundaryEdge {
                    nodes: [grid[c][0], grid[c + 1][0]],
                    marker: Marker::Wall,
                });
                boundary.push(BoundaryEdge {
                    nodes: [grid[c][n0], grid[c + 1][n0]],
                    marker: Marker::Wall,
                });
            }
            let end_marker = if side < 0.0 { Marker::Inflow } else { Marker::Outflow };
            for r in 0..n0 {
                boundary.push(BoundaryEdge {
                    nodes: [grid[n_cols][r], grid[n_cols][r + 1]],
                    marker: end_marker,
                });
            }
        }
    }

    let mesh = Mesh::new(nodes, triangles, boundary)?;
    log::debug!(
        "benchmark mesh: {} nodes, {} triangles, {} rings (ratio {:.4})",
        mesh.n_nodes(),
        mesh.n_triangles(),
        n_rings,
        ratio
    );
    Ok(GridHierarchy::new(mesh))
}

/// Point `j` of the square ring with half-size `s`; counterclockwise from
/// the lower left corner with `n0` segments per side.
fn ring_point(s: f64, j: usize, n0: usize) -> Point {
    let side = j / n0;
    let t = (j % n0) as f64 / n0 as f64;
    let a = -s + 2.0 * s * t;
    match side {
        0 => [a, -s],
        1 => [s, a],
        2 => [-a, s],
        _ => [-s, -a],
    }
}

/// Splits a quadrilateral along its shorter diagonal into two
/// counterclockwise triangles.
fn push_quad(nodes: &[Point], q: [usize; 4], triangles: &mut Vec<[usize; 3]>) {
    let d02 = dist2(nodes[q[0]], nodes[q[2]]);
    let d13 = dist2(nodes[q[1]], nodes[q[3]]);
    let pair = if d02 <= d13 {
        [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]
    } else {
        [[q[0], q[1], q[3]], [q[1], q[2], q[3]]]
    };
    for [a, b, c] in pair {
        if signed_area(nodes[a], nodes[b], nodes[c]) > 0.0 {
            triangles.push([a, b, c]);
        } else {
            triangles.push([a, c, b]);
        }
    }
}

fn dist2(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Boundary markers of the four sides of a rectangle.
#[derive(Debug, Clone, Copy)]
pub struct RectangleMarkers {
    pub left: Marker,
    pub right: Marker,
    pub bottom: Marker,
    pub top: Marker,
}

impl Default for RectangleMarkers {
    fn default() -> Self {
        RectangleMarkers {
            left: Marker::Inflow,
            right: Marker::Outflow,
            bottom: Marker::Wall,
            top: Marker::Wall,
        }
    }
}

/// Uniform `nx x ny` grid of `[x0, x1] x [y0, y1]`, each cell split into two
/// triangles along the lower-left to upper-right diagonal.
pub fn rectangle_mesh(
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    nx: usize,
    ny: usize,
    markers: RectangleMarkers,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 || !(x1 > x0) || !(y1 > y0) {
        return Err(Error::Parameter(format!(
            "rectangle needs positive extent and cell counts, got [{x0}, {x1}] x [{y0}, {y1}], {nx} x {ny}"
        )));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { x1 } else { x0 + (x1 - x0) * i as f64 / nx as f64 };
            let y = if j == ny { y1 } else { y0 + (y1 - y0) * j as f64 / ny as f64 };
            nodes.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mut boundary = Vec::new();
    for i in 0..nx {
        boundary.push(BoundaryEdge { nodes: [id(i, 0), id(i + 1, 0)], marker: markers.bottom });
        boundary.push(BoundaryEdge { nodes: [id(i + 1, ny), id(i, ny)], marker: markers.top });
    }
    for j in 0..ny {
        boundary.push(BoundaryEdge { nodes: [id(nx, j), id(nx, j + 1)], marker: markers.right });
        boundary.push(BoundaryEdge { nodes: [id(0, j + 1), id(0, j)], marker: markers.left });
    }
    Mesh::new(nodes, triangles, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{obstacle_polygon, quality_report};

    #[test]
    fn benchmark_wetted_area() {
        let h = generate_benchmark_mesh(20.0, 6.0, 0.4, 8).unwrap();
        let mesh = h.finest();
        // Independent route: sum of element areas against the analytic value.
        assert!((mesh.area() - 119.84).abs() < 1e-10, "area {}", mesh.area());
        assert!((mesh.boundary_shoelace_area() - 119.84).abs() < 1e-10);
    }

    #[test]
    fn benchmark_is_valid_and_positive() {
        let h = generate_benchmark_mesh(20.0, 6.0, 0.4, 8).unwrap();
        let mesh = h.finest();
        assert!((0..mesh.n_triangles()).all(|t| mesh.triangle_area(t) > 0.0));
        let q = quality_report(mesh);
        assert!(q.min_angle > 0.0);
        assert!(q.min_angle > 20.0, "min angle {}", q.min_angle);
    }

    #[test]
    fn minimal_obstacle_loop_closes() {
        let h = generate_benchmark_mesh(2.0, 2.0, 1.0, 4).unwrap();
        let poly = obstacle_polygon(h.finest()).unwrap();
        assert!(poly.points().len() >= 4);
        assert!((poly.area() - 1.0).abs() < 1e-12);
        let counts = h.finest().marker_counts();
        assert!(counts.iter().all(|&c| c > 0), "{counts:?}");
    }

    #[test]
    fn obstacle_barycenter_at_origin() {
        let h = generate_benchmark_mesh(20.0, 6.0, 0.4, 8).unwrap();
        let m = h.finest();
        let mut moment = [0.0f64; 2];
        for t in 0..m.n_triangles() {
            let p = m.triangle_points(t);
            let area = m.triangle_area(t);
            for c in 0..2 {
                moment[c] += area * (p[0][c] + p[1][c] + p[2][c]) / 3.0;
            }
        }
        // Roundoff scale: |Omega| * L / 2 * eps ~ 1e-13 per term sum.
        assert!(moment[0].abs() < 1e-11 && moment[1].abs() < 1e-11, "{moment:?}");
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(generate_benchmark_mesh(20.0, 6.0, 7.0, 8).is_err());
        assert!(generate_benchmark_mesh(4.0, 6.0, 0.4, 8).is_err());
        assert!(generate_benchmark_mesh(20.0, 6.0, 0.4, 3).is_err());
        assert!(generate_benchmark_mesh(20.0, 6.0, -0.4, 8).is_err());
    }

    #[test]
    fn rectangle_counts() {
        let m = rectangle_mesh((0.0, 1.0), (0.0, 1.0), 3, 2, RectangleMarkers::default()).unwrap();
        assert_eq!(m.n_nodes(), 12);
        assert_eq!(m.n_triangles(), 12);
        assert!((m.area() - 1.0).abs() < 1e-14);
    }
}
