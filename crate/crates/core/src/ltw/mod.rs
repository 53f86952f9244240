//! The universal LTW family: covers, counting, and lazily built levels.

pub mod counting;
pub mod cover;
pub mod family;

pub use counting::{counting_entry, counting_index, family_counting, CountingEntry, FamilyCounting};
pub use cover::{epsilon_cover, epsilon_cover_with, lattice_cover, CoverConfig, CoverKind, CoverPolicy, EpsilonCover};
pub use family::{consistency_check, evaluate_protocol, ltw_embezzle, FamilyConfig, LtwFamily, LtwOutcome, LtwProtocol};
