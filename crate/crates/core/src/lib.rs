//! Simulation and verification tools for the two-parameter Poisson-Dirichlet
//! family and its PG(α,ζ) / EPG(α,ζ) generalizations.

pub mod bridges;
pub mod chains;
pub mod densities;
pub mod error;
pub mod mass_partition;
pub mod partitions;
pub mod quad;
pub mod random;
pub mod sticks;
pub mod verify;

pub use error::{Error, Result};
pub use random::{RngStream, StableIndex, ZetaSpec};

/// Fixed 17-significant-digit rendering used by every CSV/JSON writer.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}
