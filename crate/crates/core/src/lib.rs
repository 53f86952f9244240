//! Numerical laboratory for embezzlement of entanglement: catalyst
//! constructions, universal families, and diagonal (classical) variants.

pub mod caps;
pub mod catalyst;
pub mod diagonal;
pub mod error;
pub mod ltw;
pub mod report;
pub mod tensor;
pub mod vdh;

pub use caps::Caps;
pub use error::{LabError, Result};
