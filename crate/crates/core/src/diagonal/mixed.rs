//! Mixed diagonal targets from trace embezzlers, assembled through the
//! polar lift of a partial-permutation contraction.
//!
//! The resource is a product of catalyst factors `ω_r^{(n_r)}` (point mass to
//! uniform), one per trace dimension `r` the construction needs. Basis strings
//! of a factor are read most significant digit first. The trace embezzler
//! `T_r` on a factor sends `x = (x_1, …, x_n)` to `(0, x_1, …, x_{n−1})` with
//! ancilla value `x_n`.

use serde::{Deserialize, Serialize};

use super::catalyst::{point_to_uniform_error, DiagonalFamily};
use super::rational::{rationalize_spectrum, to_f64, Rational, DEFAULT_DENOMINATOR_CAP};
use crate::caps::{checked_pow, Caps};
use crate::error::{LabError, Result};
use crate::report::{BoundKind, ErrorReport, Protocol};
use crate::tensor::linalg::{l1_distance, PartialPermutation};
use crate::tensor::state::{neumaier_sum, Spectrum};

/// Tolerance used to rationalize the target when none is given.
pub const DEFAULT_RATIONAL_TOL: f64 = 1e-9;

/// One catalyst factor of the resource.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceFactor {
    pub r: usize,
    pub n: usize,
    pub level: usize,
    pub trace_error: f64,
}

/// A trace embezzler acting on the factor with local dimension `dim`, with
/// ancilla values placed at `offset .. offset + dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockIsometry {
    pub block: usize,
    pub dim: u64,
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedEmbezzleConstruction {
    pub target: Vec<f64>,
    pub epsilon: f64,
    pub rationals: Vec<(u64, u64)>,
    pub rationalization_gap: f64,
    pub common_denominator: u64,
    pub factors: Vec<ResourceFactor>,
    pub block_isometries: Vec<BlockIsometry>,
    pub uniformizer: BlockIsometry,
    /// Resource inputs annihilated by the contraction.
    pub kernel_size: usize,
    pub resource_dim: usize,
    /// `‖s(ω)s* − ω ⊗ ρ‖₁`.
    pub contraction_error: f64,
    /// Largest deviation of `V*V` from the identity; exactly zero for a lift
    /// that is injective on basis vectors.
    pub isometry_defect: f64,
    pub report: ErrorReport,
}

impl MixedEmbezzleConstruction {
    pub fn measured_error(&self) -> f64 {
        self.report.exact_error
    }
}

struct Factor {
    r: usize,
    n: usize,
    len: usize,
    stride: usize,
    /// Probability indexed by the number of leading zero digits.
    by_zeros: Vec<f64>,
}

impl Factor {
    fn new(r: usize, n: usize) -> Self {
        let by_zeros = (0..=n)
            .map(|zeros| {
                let top = zeros.min(n - 1);
                neumaier_sum((1..=top).map(|k| (r as f64).powi(-((n - k) as i32)))) / (n as f64 - 1.0)
            })
            .collect();
        Factor {
            r,
            n,
            len: checked_pow(r, n) as usize,
            stride: 0,
            by_zeros,
        }
    }

    fn probability(&self, local: usize) -> f64 {
        let mut digits = 0;
        let mut v = local;
        while v > 0 {
            v /= self.r;
            digits += 1;
        }
        self.by_zeros[self.n - digits]
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Execute the construction: rationalize, embed blockwise with trace
/// embezzlers, uniformize, contract, lift, and measure.
pub fn mixed_from_trace_embezzlers(
    target: &[f64],
    family: &DiagonalFamily,
    epsilon: f64,
    caps: &Caps,
) -> Result<MixedEmbezzleConstruction> {
    mixed_with_tolerance(target, family, epsilon, DEFAULT_RATIONAL_TOL, caps)
}

pub fn mixed_with_tolerance(
    target: &[f64],
    family: &DiagonalFamily,
    epsilon: f64,
    tolerance: f64,
    caps: &Caps,
) -> Result<MixedEmbezzleConstruction> {
    Spectrum::new(target.to_vec())?;
    let d = target.len();
    let rationals = rationalize_spectrum(target, tolerance, DEFAULT_DENOMINATOR_CAP)?;
    let approx: Vec<f64> = rationals.iter().map(to_f64).collect();
    let gap = l1_distance(target, &approx);

    let q = rationals.iter().try_fold(1u64, |acc, r| {
        let den = *r.denom();
        (acc / gcd(acc, den)).checked_mul(den)
    });
    let q = q.ok_or_else(|| LabError::Rationalization("common denominator overflows".into()))?;
    let blocks: Vec<u64> = rationals
        .iter()
        .map(|r| (*r * Rational::from_integer(q)).to_integer())
        .collect();

    let mut dims: Vec<usize> = blocks
        .iter()
        .chain(std::iter::once(&q))
        .filter(|&&p| p >= 2)
        .map(|&p| p as usize)
        .collect();
    dims.sort_unstable();
    dims.dedup();

    let mut factors = Vec::with_capacity(dims.len());
    let mut sim = Vec::with_capacity(dims.len());
    let mut resource_dim: u128 = 1;
    for &r in &dims {
        let (level, n) = family.select(r, epsilon)?;
        factors.push(ResourceFactor {
            r,
            n,
            level,
            trace_error: point_to_uniform_error(r, n),
        });
        resource_dim = resource_dim.saturating_mul(checked_pow(r, n));
        sim.push(Factor::new(r, n));
    }
    let k = caps.check_state(resource_dim, "mixed construction resource")?;
    caps.check_state(resource_dim.saturating_mul(d as u128), "mixed construction output")?;
    let mut stride = 1;
    for f in sim.iter_mut().rev() {
        f.stride = stride;
        stride *= f.len;
    }
    let factor_of = |r: usize| dims.iter().position(|&x| x == r);

    let mut offsets = Vec::with_capacity(d);
    let mut acc = 0u64;
    for &p in &blocks {
        offsets.push(acc);
        acc += p;
    }
    let block_isometries: Vec<BlockIsometry> = blocks
        .iter()
        .zip(&offsets)
        .enumerate()
        .map(|(block, (&dim, &offset))| BlockIsometry { block, dim, offset })
        .collect();
    let uniformizer = BlockIsometry {
        block: 0,
        dim: q,
        offset: 0,
    };

    let omega = |x: usize| -> f64 {
        sim.iter()
            .map(|f| f.probability((x / f.stride) % f.len))
            .product()
    };

    // s = v* w on basis vectors
    let contraction = |x: usize| -> Option<usize> {
        let (mut y, b) = match factor_of(q as usize) {
            Some(i) => {
                let f = &sim[i];
                let local = (x / f.stride) % f.len;
                (x - local * f.stride + (local / f.r) * f.stride, (local % f.r) as u64)
            }
            None => (x, 0),
        };
        let j = (0..d).find(|&i| offsets[i] <= b && b < offsets[i] + blocks[i])?;
        let inner = b - offsets[j];
        if blocks[j] >= 2 {
            let f = &sim[factor_of(blocks[j] as usize).expect("block factor")];
            let local = (y / f.stride) % f.len;
            if local >= f.len / f.r {
                return None;
            }
            y = y - local * f.stride + (local * f.r + inner as usize) * f.stride;
        }
        Some(y * d + j)
    };

    let image: Vec<Option<usize>> = (0..k).map(contraction).collect();
    let partial = PartialPermutation::new(k * d, image)?;
    let lifted = partial.polar_lift()?;
    let kernel_size = partial.image().iter().filter(|t| t.is_none()).count();

    let probs: Vec<f64> = (0..k).map(omega).collect();
    let mut pushed = vec![0.0; k * d];
    for (x, t) in partial.image().iter().enumerate() {
        if let Some(i) = t {
            pushed[*i] += probs[x];
        }
    }
    let distance = |pushed: &[f64]| {
        neumaier_sum(
            pushed
                .iter()
                .enumerate()
                .map(|(i, &p)| (p - probs[i / d] * target[i % d]).abs()),
        )
    };
    let contraction_error = distance(&pushed);
    let mut seen = vec![false; k * d];
    let mut injective = true;
    for (x, &t) in lifted.iter().enumerate() {
        injective &= !std::mem::replace(&mut seen[t], true);
        if partial.image()[x].is_none() {
            pushed[t] += probs[x];
        }
    }
    let measured = distance(&pushed);

    let mut protocol = Protocol::cyclic(
        "polar lift of the contraction from blockwise trace embezzlers",
        num_complex::Complex64::new(1.0, 0.0),
        Vec::new(),
        factors.iter().map(|f| f.n + 1).max().unwrap_or(1),
    );
    protocol.level = factors.iter().map(|f| f.level).max();
    Ok(MixedEmbezzleConstruction {
        target: target.to_vec(),
        epsilon,
        rationals: rationals.iter().map(|r| (*r.numer(), *r.denom())).collect(),
        rationalization_gap: gap,
        common_denominator: q,
        factors,
        block_isometries,
        uniformizer,
        kernel_size,
        resource_dim: k,
        contraction_error,
        isometry_defect: if injective { 0.0 } else { 1.0 },
        report: ErrorReport {
            exact_error: measured,
            analytic_bound: 6.0 * (2.0 * epsilon).sqrt() + 2.0 * gap,
            bound: BoundKind::PolarLift,
            protocol,
            reference_error: Some(contraction_error),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::catalyst::{approx_catalyst, site};
    use crate::tensor::linalg::polar_isometry;
    use crate::tensor::state::DiagonalState;

    #[test]
    fn factor_probabilities_match_catalyst() {
        let caps = Caps::default();
        for (r, n) in [(2, 3), (3, 4), (2, 6)] {
            let f = Factor::new(r, n);
            let point = DiagonalState::point_mass(site(r).unwrap(), 0).unwrap();
            let uniform = DiagonalState::uniform(site(r).unwrap());
            let omega = approx_catalyst(&point, &uniform, n, &caps).unwrap();
            for (x, &p) in omega.probabilities().iter().enumerate() {
                assert!((f.probability(x) - p).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pure_target_is_exact() {
        let caps = Caps::default();
        let fam = DiagonalFamily { prefix: 200 };
        let c = mixed_from_trace_embezzlers(&[1.0, 0.0], &fam, 0.5, &caps).unwrap();
        assert_eq!(c.measured_error(), 0.0);
        assert_eq!(c.resource_dim, 1);
        assert!(c.factors.is_empty());
    }

    #[test]
    fn uniform_target_reduces_to_trace_embezzler() {
        let caps = Caps::default();
        let fam = DiagonalFamily { prefix: 200 };
        for d in [2, 3] {
            let target = vec![1.0 / d as f64; d];
            let c = mixed_from_trace_embezzlers(&target, &fam, 0.5, &caps).unwrap();
            assert_eq!(c.common_denominator, d as u64);
            assert_eq!(c.kernel_size, 0);
            let t = fam.trace_embezzle_unitary(d, 0.5, &caps).unwrap();
            assert!((c.measured_error() - t.report.exact_error).abs() < 1e-12);
            assert!(c.measured_error() < 0.5);
        }
    }

    #[test]
    fn two_thirds_within_bound() {
        let caps = Caps::default();
        let fam = DiagonalFamily { prefix: 200 };
        let c = mixed_from_trace_embezzlers(&[2.0 / 3.0, 1.0 / 3.0], &fam, 0.3, &caps).unwrap();
        assert_eq!(c.rationals, vec![(2, 3), (1, 3)]);
        assert_eq!(c.isometry_defect, 0.0);
        assert!(c.report.within_bound());
        assert!(c.measured_error() > 0.0);
        assert!((c.measured_error() - 0.4170381801554668).abs() < 1e-12);
        let c = mixed_from_trace_embezzlers(&[2.0 / 3.0, 1.0 / 3.0], &fam, 0.5, &caps).unwrap();
        assert!((c.measured_error() - 0.5510425240054867).abs() < 1e-12);
    }

    #[test]
    fn small_epsilon_is_over_cap() {
        let caps = Caps::default();
        let fam = DiagonalFamily { prefix: 10_000 };
        assert!(matches!(
            mixed_from_trace_embezzlers(&[2.0 / 3.0, 1.0 / 3.0], &fam, 0.05, &caps),
            Err(LabError::DimensionOverCap { .. })
        ));
    }

    #[test]
    fn lift_matches_dense_polar_decomposition() {
        let image = vec![Some(3), None, Some(0), None];
        let p = PartialPermutation::new(6, image).unwrap();
        let lifted = p.polar_lift().unwrap();
        let dense = polar_isometry(&p.to_dense(), 1e-12).unwrap().isometry;
        for (col, &row) in lifted.iter().enumerate() {
            assert!((dense[(row, col)].re - 1.0).abs() < 1e-10);
        }
    }
}
