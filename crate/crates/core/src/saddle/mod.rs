//! Saddle-point systems `[A B; B^T 0]` solved through the Schur complement
//! `S = -B^T A^{-1} B`, either directly or by GMRES.

mod givens;
mod gmres;
mod inner;
mod schur;

pub use givens::givens;
pub use gmres::{gmres, schur_gmres, GmresOutcome, SchurGmresResult};
pub use inner::{build_inner_solver, InnerMode, InnerSolver};
pub use schur::{schur_product, solve_saddle_direct, SaddlePointSystem, SaddleSolution};
