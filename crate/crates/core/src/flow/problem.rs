use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{DofMap, FunctionSpace, SpaceKind};
use crate::mesh::{Marker, Mesh, Point};

pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

/// Inflow velocity `(max{0, cos(pi |x_2| / delta)}, 0)`.
pub fn inflow_profile(x: Point, delta: f64) -> [f64; 2] {
    [(std::f64::consts::PI * x[1].abs() / delta).cos().max(0.0), 0.0]
}

/// Velocity prescribed on the Dirichlet part of the boundary.
#[derive(Clone)]
pub enum BoundaryVelocity {
    /// Inflow profile of height `delta` on inflow edges, zero on walls and
    /// on the obstacle.
    Channel { delta: f64 },
    /// Arbitrary values on every inflow, wall and obstacle dof.
    Custom(Arc<dyn Fn(Point, Marker) -> [f64; 2] + Send + Sync>),
}

/// Stationary Navier-Stokes data; the outflow boundary is natural.
#[derive(Clone)]
pub struct FlowProblem {
    pub nu: f64,
    pub boundary: BoundaryVelocity,
    /// Body force `f`.
    pub forcing: Option<VectorFn>,
    /// Outflow traction `h` in `nu d_n v - q n = h`.
    pub traction: Option<VectorFn>,
}

impl std::fmt::Debug for FlowProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlowProblem")
            .field("nu", &self.nu)
            .field("forcing", &self.forcing.is_some())
            .field("traction", &self.traction.is_some())
            .finish()
    }
}

impl FlowProblem {
    /// Channel flow with the inflow profile of height `delta`.
    pub fn channel(nu: f64, delta: f64) -> Self {
        FlowProblem {
            nu,
            boundary: BoundaryVelocity::Channel { delta },
            forcing: None,
            traction: None,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::Parameter(format!("viscosity must be positive, got {}", self.nu)));
        }
        if let BoundaryVelocity::Channel { delta } = self.boundary {
            if !(delta > 0.0) {
                return Err(Error::Parameter(format!("inflow height must be positive, got {delta}")));
            }
        }
        Ok(())
    }
}

/// Taylor-Hood numbering: P2 velocity dofs first, then P1 pressure dofs.
/// Local order per triangle: 12 velocity dofs (`2 basis + c`), 3 pressure.
#[derive(Debug, Clone)]
pub struct TaylorHood {
    pub velocity: FunctionSpace,
    pub pressure: FunctionSpace,
    cells: Vec<usize>,
}

impl TaylorHood {
    pub const LOCAL: usize = 15;

    pub fn new(mesh: &Mesh) -> Self {
        let velocity = FunctionSpace::new(SpaceKind::P2Vector, mesh);
        let pressure = FunctionSpace::new(SpaceKind::P1Scalar, mesh);
        let nv = velocity.dof_count();
        let mut cells = Vec::with_capacity(Self::LOCAL * mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            cells.extend_from_slice(velocity.cell_dofs(t));
            cells.extend(pressure.cell_dofs(t).iter().map(|d| nv + d));
        }
        TaylorHood { velocity, pressure, cells }
    }

    pub fn n_velocity(&self) -> usize {
        self.velocity.dof_count()
    }

    /// Splits a stacked vector into velocity and pressure parts.
    pub fn split<'a>(&self, y: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        y.split_at(self.n_velocity())
    }
}

impl DofMap for TaylorHood {
    fn dof_count(&self) -> usize {
        self.velocity.dof_count() + self.pressure.dof_count()
    }
    fn local_size(&self) -> usize {
        Self::LOCAL
    }
    fn cell_dofs(&self, triangle: usize) -> &[usize] {
        &self.cells[triangle * Self::LOCAL..(triangle + 1) * Self::LOCAL]
    }
}

/// Velocity dofs on inflow, wall and obstacle entities and their values.
pub fn velocity_dirichlet(mesh: &Mesh, problem: &FlowProblem) -> (Vec<usize>, Vec<f64>) {
    let n = mesh.n_nodes();
    let mut node_marker: Vec<Option<Marker>> = vec![None; n];
    // Walls and the obstacle take precedence over the inflow at shared corners.
    for be in mesh.boundary_edges() {
        let rank = |m: Option<Marker>| match m {
            Some(Marker::Wall) | Some(Marker::Obstacle) => 2,
            Some(Marker::Inflow) => 1,
            _ => 0,
        };
        for &v in &be.nodes {
            if rank(Some(be.marker)) > rank(node_marker[v]) {
                node_marker[v] = Some(be.marker);
            }
        }
    }
    let value = |p: Point, m: Marker| match &problem.boundary {
        BoundaryVelocity::Channel { delta } => {
            if m == Marker::Inflow {
                inflow_profile(p, *delta)
            } else {
                [0.0, 0.0]
            }
        }
        BoundaryVelocity::Custom(f) => f(p, m),
    };
    let mut dofs = Vec::new();
    let mut vals = Vec::new();
    for (i, m) in node_marker.iter().enumerate() {
        if let Some(m) = m {
            let v = value(mesh.nodes()[i], *m);
            dofs.extend([2 * i, 2 * i + 1]);
            vals.extend(v);
        }
    }
    let table = mesh.edge_table();
    for (e, m) in table.edge_markers.iter().enumerate() {
        if let Some(m @ (Marker::Inflow | Marker::Wall | Marker::Obstacle)) = m {
            let [a, b] = table.edges[e];
            let (p, q) = (mesh.nodes()[a], mesh.nodes()[b]);
            let v = value([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])], *m);
            dofs.extend([2 * (n + e), 2 * (n + e) + 1]);
            vals.extend(v);
        }
    }
    (dofs, vals)
}
