//! Seeded trials of the polar-lift bound for contractions close to
//! `ω ↦ ω ⊗ χ`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::tensor::linalg::{hermitian_trace_norm, polar_isometry};
use crate::tensor::random::{haar_vector, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionTrial {
    pub seed: u64,
    pub epsilon: f64,
    pub pre_error: f64,
    pub post_error: f64,
    pub bound: f64,
}

impl ContractionTrial {
    pub fn holds(&self) -> bool {
        self.post_error <= self.bound
    }
}

fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn error_of(s: &DMatrix<C64>, omega: &DMatrix<C64>, goal: &DMatrix<C64>) -> f64 {
    hermitian_trace_norm(&(goal - s * omega * s.adjoint()))
}

/// Random `ω` on `C^k`, random pure `χ` on `C^d`, and a contraction
/// `s = (1 ⊗ |χ⟩ + ηG)/max(1, ‖·‖)` with `η` bisected so that
/// `‖ω ⊗ χ − sωs*‖₁` sits just below `epsilon`.
pub fn contraction_trial(k: usize, d: usize, epsilon: f64, seed: u64) -> Result<ContractionTrial> {
    if k == 0 || d == 0 || !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(LabError::InvalidArgument("need k, d >= 1 and 0 < epsilon < 2".into()));
    }
    let mut rng = rng_from_seed(seed);
    let g = gaussian(k, k, &mut rng);
    let omega = {
        let m = &g * g.adjoint();
        let tr = m.trace();
        m / tr
    };
    let chi = haar_vector(d, &mut rng);
    let mut embed = DMatrix::from_element(k * d, k, C64::new(0.0, 0.0));
    for i in 0..k {
        for (a, &c) in chi.iter().enumerate() {
            embed[(i * d + a, i)] = c;
        }
    }
    let noise = gaussian(k * d, k, &mut rng);
    let goal = &embed * &omega * embed.adjoint();
    let contraction = |eta: f64| {
        let s = &embed + noise.scale(eta);
        let top = s.singular_values().max();
        if top > 1.0 {
            s.unscale(top)
        } else {
            s
        }
    };
    let mut hi = 1e-3;
    while error_of(&contraction(hi), &omega, &goal) <= epsilon {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(LabError::Numerical("could not reach the requested error".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if error_of(&contraction(mid), &omega, &goal) <= epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = contraction(lo);
    let pre = error_of(&s, &omega, &goal);
    let v = polar_isometry(&s, 1e-12)?.isometry;
    let post = error_of(&v, &omega, &goal);
    Ok(ContractionTrial {
        seed,
        epsilon,
        pre_error: pre,
        post_error: post,
        bound: 6.0 * pre.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trials_respect_the_bound() {
        for seed in 0..10 {
            for eps in [1e-2, 1e-3] {
                let t = contraction_trial(3, 2, eps, seed).unwrap();
                assert!(t.pre_error <= eps && t.pre_error > 0.5 * eps, "{t:?}");
                assert!(t.holds(), "{t:?}");
            }
        }
    }
}
