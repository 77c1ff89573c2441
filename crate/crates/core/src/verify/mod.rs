//! Statistical tests, the exact PD EPPF oracle and the identity registry.

mod eppf;
mod identities;
mod stats;

pub use eppf::*;
pub use identities::*;
pub use stats::*;
