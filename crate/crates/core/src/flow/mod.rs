//! Taylor-Hood (P2/P1) solver for stationary incompressible Navier-Stokes
//! flow, its adjoint and the shape derivative of the energy dissipation.

mod assemble;
mod gradient;
mod problem;
mod solve;

pub use assemble::assemble_ns_system;
pub use gradient::shape_gradient;
pub use problem::{inflow_profile, velocity_dirichlet, BoundaryVelocity, FlowProblem, TaylorHood, VectorFn};
pub use solve::{
    energy_dissipation, objective_gradient, solve_adjoint, solve_flow, AdjointState, FlowOptions, FlowState,
};
