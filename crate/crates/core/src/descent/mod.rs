//! Constrained p-Laplace descent subproblem.
//!
//! For a shape gradient `G` the displacement `u` (P1, interleaved dofs)
//! minimizes `1/p int (Du:Du)^{p/2} + sigma G.u` subject to preserving the
//! volume and the first moments of the deformed domain `(id + u)(Omega)`.

mod detexp;
mod kinematics;
mod lagrangian;
mod newton;

pub use detexp::det_expansion_coeffs;
pub use kinematics::{constraint_values, fixed_dofs, w1p_norm};
pub use lagrangian::{
    assemble_constraint_jacobian, assemble_defect, assemble_hessian, lagrangian_value, Multipliers,
};
pub use newton::{
    newton_descent, p_continuation, p_sequence, ContinuationResult, DescentOptions, NewtonResult,
};
