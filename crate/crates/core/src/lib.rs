//! Dyadic cubes, envelopes, cutoffs, localized singular and fractional
//! integrals, local BMO moduli and the local maximal operator on finite
//! quasi-metric measure spaces with an exhaustion by levels.
//!
//! Every construction is exact on the finite space: balls are enumerated by
//! the distinct distances, limits in the truncation parameter are attained,
//! and suprema are maxima over finite grids.

pub mod analysis;
pub mod bmo;
pub mod dyadic;
mod error;
pub mod maximal;
pub mod operators;
mod pointset;
pub mod report;
pub mod space;
pub mod suite;

pub use error::{Error, Result};
pub use pointset::PointSet;
pub use space::{FiniteSpace, LevelConstants, PointId};

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
