//! Symmetry-blocked two-level boson models (LMG, 2D vibron, 3D vibron, IBM),
//! a certified tridiagonal eigensolver in double and arbitrary precision,
//! spectral analysis of ESQPT precursors and microcanonical OTOCs.

pub mod analysis;
pub mod eigensolver;
pub mod error;
pub mod fock;
pub mod models;
pub mod otoc;
pub mod real;

pub use error::{Error, Result};
pub use models::{Model, ModelInstance, SectorBlock, SectorKind, SectorLabel};
pub use real::{BigFloat, Real};
