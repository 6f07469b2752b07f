//! Solver library for steady subsonic compressible Euler flow with a contact
//! discontinuity in a 2-D semi-infinite nozzle.
//!
//! The velocity field is split as u = grad(phi) + perp(grad(psi)); the
//! unknowns (phi, psi), the contact curve f and the entropy S are found by
//! three nested fixed-point loops on a cut-off domain of length L, with
//! continuation in L and far-field decay diagnostics.

pub mod config;
pub mod diagnostics;
pub mod driver;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod free_boundary;
pub mod gas;
pub mod geometry;
pub mod inlet;
pub mod interp;
pub mod output;
pub mod transport;

pub use error::{Result, SolverError};
pub use field::Field;
pub use gas::{Gas, GasParams};
pub use geometry::{CutDomain, FreeBoundary, MappedGrid};
pub use inlet::InletProfile;
