//! Linear wave propagation over rough, regularized bathymetry.
//!
//! The depth profile may carry jumps and point singularities (`δ`, `δ²`).
//! [`bathymetry`] replaces them by smooth families `h_ε`; [`solver1d`] and
//! [`solver2d`] integrate `u_tt = ∇·(h_ε ∇u)` with energy-conserving
//! implicit schemes; [`diagnostics`] and [`harness`] turn runs into reports.

pub mod bathymetry;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod harness;
mod quadrature;
pub mod solver1d;
pub mod solver2d;
pub mod tridiag;

pub use error::{Error, Result};
pub use quadrature::integrate;
