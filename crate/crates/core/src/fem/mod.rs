//! Finite-element kernels: element maps, quadrature, P1/P2 spaces, sparse
//! assembly and Dirichlet elimination.

mod assemble;
pub mod basis;
mod dirichlet;
mod evaluate;
mod geometry;
mod lu;
mod quadrature;
mod space;
mod sparse;

pub use assemble::{
    assemble_functional, assemble_operator, assemble_operator_into, sparsity_pattern, DofMap, Element,
};
pub use dirichlet::apply_dirichlet;
pub use evaluate::{evaluate_field, interpolate_scalar, interpolate_vector, FieldValue};
pub use geometry::{element_geometry, ElementGeometry};
pub use lu::SparseLu;
pub use quadrature::{quadrature_rule, QuadratureRule};
pub use space::{DofEntity, FunctionSpace, SpaceKind};
pub use sparse::SparseMatrix;
