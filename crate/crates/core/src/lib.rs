//! Constraint-preserving p-Laplace steepest-descent shape optimization for
//! stationary incompressible flow around an obstacle in 2D.

pub mod descent;
pub mod driver;
pub mod error;
pub mod fem;
pub mod flow;
pub mod mesh;
pub mod saddle;
pub mod verify;

pub use error::{Error, Result};
