//! The van Dam–Hayden family, its restriction to qubit chains, and optimal
//! bipartite embezzlement errors.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{LabError, Result};
use crate::tensor::linalg::{l1_distance, schmidt_spectrum, sorted_orbit_distance};
use crate::tensor::random::{rng_from_seed, LabRng};
use crate::tensor::state::{neumaier_sum, DiagonalState, PartitionedPureState, Spectrum};
use crate::tensor::SiteLayout;

/// Largest chain exponent accepted by [`vdh_restrict`].
pub const MAX_CHAIN_EXPONENT: u32 = 24;

/// `h_n = Σ_{j=1}^{n} 1/j`, compensated.
pub fn harmonic(n: u64) -> f64 {
    neumaier_sum((1..=n).rev().map(|j| 1.0 / j as f64))
}

#[derive(Debug, Clone)]
pub struct VdhState {
    pub n: usize,
    pub h_n: f64,
    /// `(1/h_n)·(1/j)`, `j = 1..n`, on a single site of dimension `n`.
    pub probabilities: DiagonalState,
}

impl VdhState {
    pub fn spectrum(&self) -> Spectrum {
        self.probabilities.spectrum()
    }

    /// Purifying bipartite vector `Σ_j sqrt(p_j)|jj⟩`.
    pub fn purification(&self, caps: &Caps) -> Result<PartitionedPureState> {
        let n = self.n;
        caps.check_state((n as u128) * (n as u128), "vdh purification")?;
        let mut amps = vec![C64::new(0.0, 0.0); n * n];
        for (j, &p) in self.probabilities.probabilities().iter().enumerate() {
            amps[j * n + j] = C64::new(p.sqrt(), 0.0);
        }
        PartitionedPureState::normalized(SiteLayout::one_site_per_party(2, n)?, amps)
    }
}

pub fn vdh_state(n: usize, caps: &Caps) -> Result<VdhState> {
    if n == 0 {
        return Err(LabError::InvalidArgument("vdh state needs n >= 1".into()));
    }
    caps.check_state(n as u128, "vdh state")?;
    let h_n = harmonic(n as u64);
    let probs = (1..=n).map(|j| 1.0 / (j as f64 * h_n)).collect();
    let layout = SiteLayout::new(vec![n], vec![0])?;
    Ok(VdhState {
        n,
        h_n,
        probabilities: DiagonalState::new(layout, probs)?,
    })
}

fn check_chain(n_exp: u32, m: u32) -> Result<()> {
    if m == 0 || m > n_exp || n_exp > MAX_CHAIN_EXPONENT {
        return Err(LabError::InvalidArgument(format!(
            "need 1 <= m <= n_exp <= {MAX_CHAIN_EXPONENT}, got m={m}, n_exp={n_exp}"
        )));
    }
    Ok(())
}

/// Restriction of `ω^{(2^{n_exp})}` to the first `m` qubits of the chain
/// under `a ↦ diag(a, …, a)`: entry `k` is
/// `h^{-1} Σ_{l=1}^{2^{n_exp−m}} 1/((l−1)·2^m + k)`.
pub fn vdh_restrict(n_exp: u32, m: u32) -> Result<DiagonalState> {
    check_chain(n_exp, m)?;
    let h = harmonic(1u64 << n_exp);
    let block = 1u64 << m;
    let reps = 1u64 << (n_exp - m);
    let probs: Vec<f64> = (1..=block)
        .into_par_iter()
        .map(|k| neumaier_sum((0..reps).rev().map(|l| 1.0 / (l * block + k) as f64)) / h)
        .collect();
    let layout = SiteLayout::new(vec![2; m as usize], vec![0; m as usize])?;
    DiagonalState::new(layout, probs)
}

/// Factors `(lower, upper)` with `lower·2^{−m} ≤ entry ≤ upper·2^{−m}`:
/// `lower = h_{2^{n−m}}/h_{2^n}`, `upper = (2^m + h_{2^{n−m}})/h_{2^n}`.
pub fn sandwich_factors(n_exp: u32, m: u32) -> Result<(f64, f64)> {
    check_chain(n_exp, m)?;
    let h = harmonic(1u64 << n_exp);
    let inner = harmonic(1u64 << (n_exp - m));
    Ok((inner / h, ((1u64 << m) as f64 + inner) / h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_exp: u32,
    pub m: u32,
    pub distance: f64,
    pub lower_bound_factor: f64,
    pub upper_bound_factor: f64,
}

/// Trace distance of each restriction to the uniform state on `2^m`.
pub fn trace_convergence(n_exps: &[u32], m: u32) -> Result<Vec<ConvergenceRow>> {
    n_exps
        .iter()
        .map(|&n_exp| {
            let restricted = vdh_restrict(n_exp, m)?;
            let uniform = DiagonalState::uniform(restricted.layout().clone());
            let (lower, upper) = sandwich_factors(n_exp, m)?;
            Ok(ConvergenceRow {
                n_exp,
                m,
                distance: l1_distance(restricted.probabilities(), uniform.probabilities()),
                lower_bound_factor: lower,
                upper_bound_factor: upper,
            })
        })
        .collect()
}

/// `h_{2^{n_exp}}^{-1} Σ_{l=1}^{2^{n_exp−1}} (1/(2l−1) − 1/(2l))`, the
/// distance for `m = 1` written as one alternating sum.
pub fn alternating_distance(n_exp: u32) -> Result<f64> {
    check_chain(n_exp, 1)?;
    let half = 1u64 << (n_exp - 1);
    let s = neumaier_sum((1..=half).rev().map(|l| 1.0 / ((2 * l - 1) * 2 * l) as f64));
    Ok(s / harmonic(1u64 << n_exp))
}

/// Best fidelity `Σ sqrt(p↓_i q↓_i)` between the Schmidt spectra of
/// `resource ⊗ source` and `resource ⊗ target`.
pub fn optimal_bipartite_fidelity(
    resource: &Spectrum,
    source: &PartitionedPureState,
    target: &PartitionedPureState,
    caps: &Caps,
) -> Result<f64> {
    check_bipartite(source)?;
    source.layout().ensure_same(target.layout(), "bipartite endpoints")?;
    let p = resource.tensor(&schmidt_spectrum(source, &[0], caps)?);
    let q = resource.tensor(&schmidt_spectrum(target, &[0], caps)?);
    let len = p.len().max(q.len());
    let (p, q) = (p.padded(len), q.padded(len));
    Ok(neumaier_sum(
        p.values().iter().zip(q.values()).map(|(a, b)| (a * b).sqrt()),
    )
    .min(1.0))
}

/// `2·sqrt(1 − F²)` with `F` from [`optimal_bipartite_fidelity`].
pub fn optimal_bipartite_error(
    resource: &Spectrum,
    source: &PartitionedPureState,
    target: &PartitionedPureState,
    caps: &Caps,
) -> Result<f64> {
    let f = optimal_bipartite_fidelity(resource, source, target, caps)?;
    Ok(2.0 * (1.0 - f * f).max(0.0).sqrt())
}

fn check_bipartite(state: &PartitionedPureState) -> Result<()> {
    let parties = state.layout().party_of_site();
    if state.layout().n_parties() != 2 || parties.windows(2).any(|w| w[0] > w[1]) {
        return Err(LabError::InvalidLayout(
            "expected a bipartite layout with party 0's sites first".into(),
        ));
    }
    Ok(())
}

/// Amplitude matrix of `Ω ⊗ state` with rows `(i, a)` on side A and
/// columns `(i', b)` on side B, where `Ω = Σ sqrt(r_i)|ii⟩`.
fn joint_matrix(resource: &Spectrum, state: &PartitionedPureState) -> DMatrix<C64> {
    let layout = state.layout();
    let da = layout.dim_of(&layout.party_sites(0)) as usize;
    let db = layout.dim_of(&layout.party_sites(1)) as usize;
    let r = resource.len();
    let mut m = DMatrix::from_element(r * da, r * db, C64::new(0.0, 0.0));
    for (i, &w) in resource.values().iter().enumerate() {
        let s = w.sqrt();
        for a in 0..da {
            for b in 0..db {
                m[(i * da + a, i * db + b)] = state.amplitudes()[a * db + b] * s;
            }
        }
    }
    m
}

/// Unitary polar factor `V U†` of `x = U Σ V†`: maximizes `|tr(u x)|`.
fn maximizing_unitary(x: &DMatrix<C64>) -> DMatrix<C64> {
    let svd = x.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V");
    v_t.adjoint() * u.adjoint()
}

fn haar_unitary(dim: usize, rng: &mut LabRng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Brute-force `max |⟨Ω ⊗ target|(u_A ⊗ u_B)|Ω ⊗ source⟩|` by alternating
/// polar maximization from `restarts` Haar-random starting points.
pub fn brute_force_bipartite_fidelity(
    resource: &Spectrum,
    source: &PartitionedPureState,
    target: &PartitionedPureState,
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    check_bipartite(source)?;
    source.layout().ensure_same(target.layout(), "bipartite endpoints")?;
    let s = joint_matrix(resource, source);
    let t = joint_matrix(resource, target);
    let (da, db) = s.shape();
    if da * db > 256 {
        return Err(LabError::DimensionOverCap {
            requested: (da * db) as u128,
            cap: 256,
            context: "brute-force local unitary search",
        });
    }
    let t_adj = t.adjoint();
    let mut rng = rng_from_seed(seed);
    let mut best: f64 = 0.0;
    for _ in 0..restarts.max(1) {
        // value = tr(T† u_A S u_Bᵀ)
        let mut ub_t = haar_unitary(db, &mut rng);
        let mut value = 0.0;
        for _ in 0..20_000 {
            let ua = maximizing_unitary(&(&s * &ub_t * &t_adj));
            ub_t = maximizing_unitary(&(&t_adj * &ua * &s));
            let next = (&t_adj * &ua * &s * &ub_t).trace().norm();
            let done = (next - value).abs() < 1e-14;
            value = next;
            if done {
                break;
            }
        }
        best = best.max(value);
    }
    Ok(best.min(1.0))
}

/// `‖τ_{2^m} ⊗ |0⟩⟨0| − u(τ_{2^m} ⊗ 1/d)u*‖₁` minimized over `u`, which is
/// `2(1 − 1/d)` for every `m`.
pub fn trace_nonembezzlement_witness(m: u32, d: usize) -> Result<f64> {
    if d == 0 || m > 20 {
        return Err(LabError::InvalidArgument(format!(
            "witness needs d >= 1 and m <= 20, got d={d}, m={m}"
        )));
    }
    let block = 1usize << m;
    let tau = Spectrum::new(vec![1.0 / block as f64; block])?;
    let mut pure = vec![0.0; d];
    pure[0] = 1.0;
    let p = tau.tensor(&Spectrum::new(pure)?);
    let q = tau.tensor(&Spectrum::new(vec![1.0 / d as f64; d])?);
    Ok(sorted_orbit_distance(&p, &q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn two_qubits(amps: Vec<C64>) -> PartitionedPureState {
        PartitionedPureState::normalized(SiteLayout::one_site_per_party(2, 2).unwrap(), amps).unwrap()
    }

    #[test]
    fn vdh_examples() {
        let caps = Caps::default();
        assert_eq!(vdh_state(1, &caps).unwrap().probabilities.probabilities(), &[1.0]);
        let s = vdh_state(2, &caps).unwrap();
        assert!((s.h_n - 1.5).abs() < 1e-15);
        assert!((s.probabilities.probabilities()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((vdh_state(4, &caps).unwrap().h_n - 25.0 / 12.0).abs() < 1e-14);
        let schmidt = schmidt_spectrum(&s.purification(&caps).unwrap(), &[0], &caps).unwrap();
        assert!((schmidt.values()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((schmidt.values()[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(vdh_state(0, &caps).is_err());
    }

    #[test]
    fn restriction_examples() {
        let r = vdh_restrict(1, 1).unwrap();
        assert!((r.probabilities()[0] - 2.0 / 3.0).abs() < 1e-15);
        let full = vdh_restrict(3, 3).unwrap();
        let direct = vdh_state(8, &Caps::default()).unwrap();
        for (a, b) in full.probabilities().iter().zip(direct.probabilities.probabilities()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(vdh_restrict(2, 3).is_err());
        assert!(vdh_restrict(25, 1).is_err());
    }

    #[test]
    fn convergence_examples() {
        let rows = trace_convergence(&[1, 16], 1).unwrap();
        assert!((rows[0].distance - 1.0 / 3.0).abs() < 1e-15);
        assert!((rows[1].distance - alternating_distance(16).unwrap()).abs() < 1e-12);
        assert!((rows[1].distance - 0.0594).abs() < 5e-4);
    }

    #[test]
    fn optimal_error_example_matches_formula_and_oracle() {
        let caps = Caps::default();
        let resource = Spectrum::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let source = two_qubits(vec![c(0.0), c(0.0), c(0.0), c(1.0)]);
        let target = two_qubits(vec![c(1.0), c(0.0), c(0.0), c(1.0)]);
        let f = optimal_bipartite_fidelity(&resource, &source, &target, &caps).unwrap();
        assert!((f - (2f64.sqrt() / 3.0 + 1.0 / 3.0)).abs() < 1e-12);
        let err = optimal_bipartite_error(&resource, &source, &target, &caps).unwrap();
        assert!((err - 1.1872606893842854).abs() < 1e-12);
        let brute = brute_force_bipartite_fidelity(&resource, &source, &target, 20, 1).unwrap();
        assert!((brute - f).abs() < 1e-6);
        assert_eq!(optimal_bipartite_error(&resource, &source, &source, &caps).unwrap(), 0.0);
    }

    #[test]
    fn witness_examples() {
        assert_eq!(trace_nonembezzlement_witness(1, 2).unwrap(), 1.0);
        assert_eq!(trace_nonembezzlement_witness(10, 2).unwrap(), 1.0);
        assert_eq!(trace_nonembezzlement_witness(3, 1).unwrap(), 0.0);
        assert!((trace_nonembezzlement_witness(2, 3).unwrap() - 4.0 / 3.0).abs() < 1e-15);
    }
}
