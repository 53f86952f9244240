//! Finite-dimensional multipartite states and the operations on them.

pub mod layout;
pub mod linalg;
pub mod permutation;
pub mod product_sum;
pub mod random;
pub mod state;

pub use layout::SiteLayout;
pub use linalg::{
    polar_isometry, pure_trace_distance, schmidt_spectrum, sorted_orbit_distance, trace_distance,
    trace_distance_diagonal, PartialPermutation, PartialTrace, PolarDecomposition,
};
pub use permutation::SitePermutationUnitary;
pub use product_sum::{Palette, ProductSumState};
pub use state::{DensityState, DiagonalState, PartitionedPureState, Spectrum};
