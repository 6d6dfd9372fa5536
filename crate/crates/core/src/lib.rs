//! Finite-geometry workbench for PG(3,q), q = 2^n: the symplectic quadrangle
//! W(q), ovoids, Singer-cycle ovoidal fibrations, dual grids and the binary
//! codes they span, with exhaustive verification suites.

pub mod cache;
pub mod cli;
pub mod error;
pub mod fibration;
pub mod gf2code;
pub mod gfield;
pub mod linalg;
pub mod ovoids;
pub mod projspace;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};
