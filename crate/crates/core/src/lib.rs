//! Nested Schur-complement solvers for implicit time stepping of Maxwell's
//! equations with a perfectly matched layer (PML).
//!
//! The field unknowns live on a staggered Yee grid ([`yee`]); the PML adds
//! auxiliary unknowns coupled through sparse blocks ([`pml`]). One implicit
//! step solves a saddle-point-like system
//!
//! ```text
//! [ I + γA    γB1ᵀ ] [x1]   [b1]
//! [ -γB2      I    ] [x2] = [b2]
//! ```
//!
//! which [`solvers`] reduces twice: first eliminating the auxiliary
//! unknowns, then eliminating the magnetic field inside the preconditioner.

pub mod bench;
pub mod error;
pub mod krylov;
pub mod pml;
pub mod solvers;
pub mod sparse;
pub mod yee;

pub use error::{Error, Result};
pub use sparse::{DiagonalMatrix, SparseMatrix};
