//! Higher-order unfitted space-time finite elements on moving one-dimensional level-set domains.
//!
//! Methods: discontinuous Galerkin (DG), continuous Galerkin (CG and the tensor variant CG□)
//! and Galerkin-collocation (GCC) in time, with isoparametric geometry, direct ghost-penalty
//! stabilization and topology-preserving space-time quadrature.

pub mod assembly;
pub mod basis;
pub mod deform;
pub mod driver;
pub mod error;
pub mod fe;
pub mod levelset;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod regions;
pub mod spaces;

pub use error::{Error, Result};
