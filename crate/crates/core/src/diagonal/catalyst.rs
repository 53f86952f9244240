//! Diagonal catalysts `ω_d^{(n)} = (1/(n−1)) Σ_{k=1}^{n−1} ψ^{⊗k} ⊗ φ^{⊗(n−k)}`
//! and their cyclic-shift errors.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::caps::{checked_pow, Caps};
use crate::error::{LabError, Result};
use crate::ltw::counting::{counting_entry, least_level};
use crate::report::{BoundKind, ErrorReport, Protocol};
use crate::tensor::linalg::l1_distance;
use crate::tensor::state::DiagonalState;
use crate::tensor::{SiteLayout, SitePermutationUnitary};

const ONE: C64 = C64::new(1.0, 0.0);

/// Single-site layout of dimension `d`.
pub fn site(d: usize) -> Result<SiteLayout> {
    SiteLayout::new(vec![d], vec![0])
}

/// `n` sites of dimension `d` owned by one party.
pub fn chain(d: usize, n: usize) -> Result<SiteLayout> {
    SiteLayout::new(vec![d; n], vec![0; n])
}

fn single_site_dim(state: &DiagonalState) -> Result<usize> {
    let dims = state.layout().site_dims();
    if dims.len() != 1 {
        return Err(LabError::InvalidLayout("expected a single-site diagonal state".into()));
    }
    Ok(dims[0])
}

pub fn shift_bound(n: usize) -> f64 {
    2.0 / (n as f64 - 1.0)
}

/// Closed form of the point-mass → uniform shift error: `2(1 − d^{1−n})/(n−1)`.
pub fn point_to_uniform_error(d: usize, n: usize) -> f64 {
    2.0 * (1.0 - (d as f64).powi(1 - n as i32)) / (n as f64 - 1.0)
}

pub fn approx_catalyst(psi: &DiagonalState, phi: &DiagonalState, n: usize, caps: &Caps) -> Result<DiagonalState> {
    if n < 2 {
        return Err(LabError::InvalidArgument("diagonal catalyst needs n >= 2".into()));
    }
    let d = single_site_dim(psi)?;
    psi.layout().ensure_same(phi.layout(), "diagonal catalyst inputs")?;
    let dim = caps.check_state(checked_pow(d, n), "diagonal catalyst")?;
    let (p, q) = (psi.probabilities(), phi.probabilities());
    let mut probs = vec![0.0; dim];
    let mut digits = vec![0usize; n];
    let radix = vec![d; n];
    let mut suffix = vec![1.0; n + 1];
    let scale = 1.0 / (n as f64 - 1.0);
    for (i, out) in probs.iter_mut().enumerate() {
        crate::tensor::layout::digits_of(i, &radix, &mut digits);
        for s in (0..n).rev() {
            suffix[s] = suffix[s + 1] * q[digits[s]];
        }
        let mut prefix = 1.0;
        let mut acc = 0.0;
        for k in 1..n {
            prefix *= p[digits[k - 1]];
            acc += prefix * suffix[k];
        }
        *out = acc * scale;
    }
    DiagonalState::new(chain(d, n)?, probs)
}

/// `‖u(ψ ⊗ ω) − φ ⊗ ω‖₁` with `u` the cyclic right shift of all `n+1` sites.
pub fn approx_catalyst_error(psi: &DiagonalState, phi: &DiagonalState, n: usize, caps: &Caps) -> Result<ErrorReport> {
    let d = single_site_dim(psi)?;
    caps.check_state(checked_pow(d, n + 1), "diagonal catalyst error")?;
    let omega = approx_catalyst(psi, phi, n, caps)?;
    let joint = psi.tensor(&omega, caps)?;
    let goal = phi.tensor(&omega, caps)?;
    let sites: Vec<usize> = (0..=n).collect();
    let u = SitePermutationUnitary::cyclic_right(joint.layout().clone(), &[sites], ONE)?;
    let moved = u.apply_diagonal(&joint)?;
    let exact = l1_distance(moved.probabilities(), goal.probabilities());
    // residual (1/(n−1))·‖ψ^{⊗(n−1)} − φ^{⊗(n−1)}‖₁
    let a = power(psi, n - 1, caps)?;
    let b = power(phi, n - 1, caps)?;
    let reference = l1_distance(a.probabilities(), b.probabilities()) / (n as f64 - 1.0);
    Ok(ErrorReport {
        exact_error: exact,
        analytic_bound: shift_bound(n),
        bound: BoundKind::DiagonalShift,
        protocol: Protocol::cyclic("cyclic right shift on all n+1 sites", ONE, vec![0], n + 1),
        reference_error: Some(reference),
    })
}

fn power(state: &DiagonalState, k: usize, caps: &Caps) -> Result<DiagonalState> {
    let mut out = state.clone();
    for _ in 1..k {
        out = out.tensor(state, caps)?;
    }
    Ok(out)
}

/// The diagonal family: factors `ω_{d_k}^{(n_k)}` for the first `prefix`
/// entries of the counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalFamily {
    pub prefix: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEmbezzler {
    /// Counting index of the factor used (`None` for `r = 1`).
    pub level: Option<usize>,
    pub r: usize,
    pub n: usize,
    pub report: ErrorReport,
}

impl DiagonalFamily {
    /// Least factor with local dimension `r` and `2/(n−1) < ε`.
    pub fn select(&self, r: usize, epsilon: f64) -> Result<(usize, usize)> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(LabError::InvalidArgument("epsilon must be positive".into()));
        }
        let mut n_min = ((2.0 / epsilon).floor() as usize + 1).max(2);
        while shift_bound(n_min) >= epsilon {
            n_min += 1;
        }
        let k = least_level(r, n_min, 1)?;
        if k > self.prefix {
            return Err(LabError::ExtendFamilyPrefix(format!(
                "trace dimension {r} at accuracy {epsilon} needs counting entry {k}, prefix has {}",
                self.prefix
            )));
        }
        Ok((k, counting_entry(k)?.n))
    }

    /// Embezzle the maximally mixed state of dimension `r` from a point mass
    /// with the cyclic shift on the selected factor.
    pub fn trace_embezzle_unitary(&self, r: usize, epsilon: f64, caps: &Caps) -> Result<TraceEmbezzler> {
        if r == 0 {
            return Err(LabError::InvalidArgument("trace dimension must be positive".into()));
        }
        if r == 1 {
            return Ok(TraceEmbezzler {
                level: None,
                r,
                n: 0,
                report: ErrorReport {
                    exact_error: 0.0,
                    analytic_bound: 0.0,
                    bound: BoundKind::DiagonalShift,
                    protocol: Protocol::cyclic("identity", ONE, Vec::new(), 1),
                    reference_error: Some(0.0),
                },
            });
        }
        let (k, n) = self.select(r, epsilon)?;
        let closed = point_to_uniform_error(r, n);
        let exact = if checked_pow(r, n + 1) <= caps.state_dim as u128 {
            let point = DiagonalState::point_mass(site(r)?, 0)?;
            let uniform = DiagonalState::uniform(site(r)?);
            approx_catalyst_error(&point, &uniform, n, caps)?.exact_error
        } else {
            closed
        };
        let mut protocol = Protocol::cyclic("cyclic right shift on the selected factor", ONE, vec![0], n + 1);
        protocol.level = Some(k);
        Ok(TraceEmbezzler {
            level: Some(k),
            r,
            n,
            report: ErrorReport {
                exact_error: exact,
                analytic_bound: shift_bound(n),
                bound: BoundKind::DiagonalShift,
                protocol,
                reference_error: Some(closed),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random::{random_diagonal, rng_from_seed};

    fn qubit(p: Vec<f64>) -> DiagonalState {
        DiagonalState::new(site(p.len()).unwrap(), p).unwrap()
    }

    #[test]
    fn catalyst_examples() {
        let caps = Caps::default();
        let psi = qubit(vec![0.3, 0.7]);
        let same = approx_catalyst(&psi, &psi, 3, &caps).unwrap();
        let cube = psi.tensor(&psi, &caps).unwrap().tensor(&psi, &caps).unwrap();
        assert!(l1_distance(same.probabilities(), cube.probabilities()) < 1e-15);
        let phi = qubit(vec![0.5, 0.5]);
        let two = approx_catalyst(&psi, &phi, 2, &caps).unwrap();
        assert_eq!(two.probabilities(), psi.tensor(&phi, &caps).unwrap().probabilities());
        let point = qubit(vec![1.0, 0.0]);
        let mut values = approx_catalyst(&point, &phi, 3, &caps).unwrap().spectrum().values().to_vec();
        values.iter_mut().for_each(|x| *x = (*x * 8.0).round());
        assert_eq!(values, vec![3.0, 3.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(approx_catalyst(&point, &phi, 1, &caps).is_err());
    }

    #[test]
    fn error_examples() {
        let caps = Caps::default();
        let point = qubit(vec![1.0, 0.0]);
        let uniform = qubit(vec![0.5, 0.5]);
        let rep = approx_catalyst_error(&point, &uniform, 3, &caps).unwrap();
        assert!((rep.exact_error - 0.75).abs() < 1e-12);
        assert_eq!(approx_catalyst_error(&uniform, &uniform, 4, &caps).unwrap().exact_error, 0.0);
        let mut rng = rng_from_seed(2);
        for n in 2..=8 {
            let a = random_diagonal(site(3).unwrap(), &mut rng).unwrap();
            let b = random_diagonal(site(3).unwrap(), &mut rng).unwrap();
            let rep = approx_catalyst_error(&a, &b, n, &caps).unwrap();
            assert!(rep.within_bound());
            assert!((rep.exact_error - rep.reference_error.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_embezzler_examples() {
        let caps = Caps::default();
        let fam = DiagonalFamily { prefix: 100 };
        let t = fam.trace_embezzle_unitary(2, 0.6, &caps).unwrap();
        assert_eq!(t.n, 5);
        assert!((t.report.exact_error - 15.0 / 32.0).abs() < 1e-12);
        assert!(t.report.exact_error < 0.6);
        assert_eq!(fam.trace_embezzle_unitary(1, 0.1, &caps).unwrap().report.exact_error, 0.0);
        assert!(matches!(
            fam.trace_embezzle_unitary(2, 0.01, &caps),
            Err(LabError::ExtendFamilyPrefix(_))
        ));
    }
}
