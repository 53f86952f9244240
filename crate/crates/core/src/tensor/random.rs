//! Seeded random states. Every generator takes an explicit RNG so runs are
//! reproducible from a single `u64` seed.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::layout::SiteLayout;
use super::state::{l2_norm, DiagonalState, PartitionedPureState};
use crate::error::Result;

pub type LabRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mix a base seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Haar-random unit vector in `C^dim`.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let mut v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = l2_norm(&v);
        if n > 1e-300 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

pub fn haar_state<R: Rng + ?Sized>(layout: SiteLayout, rng: &mut R) -> Result<PartitionedPureState> {
    let dim = layout.total_dim() as usize;
    Ok(PartitionedPureState::from_parts_unchecked(layout, haar_vector(dim, rng)))
}

/// Uniformly random point of the probability simplex.
pub fn simplex_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut p: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

pub fn random_diagonal<R: Rng + ?Sized>(layout: SiteLayout, rng: &mut R) -> Result<DiagonalState> {
    let dim = layout.total_dim() as usize;
    DiagonalState::new(layout, simplex_point(dim, rng))
}
