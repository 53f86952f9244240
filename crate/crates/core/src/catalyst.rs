//! Uniform-coefficient catalysts `Ω_n(ψ, φ)`, their cyclic-shift unitaries,
//! and exact embezzlement errors.
//!
//! A catalyst on `N` parties with `n` positions lives in dimension
//! `d^{nN}`, so errors are evaluated on [`ProductSumState`]s and only
//! densified when an oracle or a marginal needs the full vector.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::caps::Caps;
use crate::error::{LabError, Result};
use crate::report::{BoundKind, ErrorReport, Protocol};
use crate::tensor::layout::{digits_of, SiteLayout};
use crate::tensor::linalg::{pure_trace_distance, trace_distance, PartialTrace};
use crate::tensor::state::{DensityState, PartitionedPureState};
use crate::tensor::{Palette, ProductSumState, SitePermutationUnitary};

/// Overlaps below this are treated as orthogonal when choosing the phase.
pub const ORTHOGONAL_TOL: f64 = 1e-14;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Phase `λ` for the overlap `⟨ψ|φ⟩`, chosen so that `⟨ψ|λφ⟩ = λ⟨ψ|φ⟩` is
/// real and nonnegative.
pub fn phase_for_overlap(overlap: C64) -> C64 {
    let r = overlap.norm();
    if r < ORTHOGONAL_TOL {
        ONE
    } else {
        overlap.conj() / r
    }
}

pub fn alignment_phase(psi: &PartitionedPureState, phi: &PartitionedPureState) -> Result<C64> {
    Ok(phase_for_overlap(psi.inner(phi)?))
}

/// `C_n = sqrt(Σ_{j,k=0}^{n} r^{|j−k|})` for the aligned overlap `r ∈ [0, 1]`.
pub fn normalization(aligned_overlap: f64, n: usize) -> f64 {
    let r = aligned_overlap;
    let mut sum = (n + 1) as f64;
    let mut power = 1.0;
    for t in 1..=n {
        power *= r;
        sum += 2.0 * (n + 1 - t) as f64 * power;
    }
    sum.sqrt()
}

/// `(1/C_n)·‖λ̄ψ^{⊗(n+1)} − λ^n φ^{⊗(n+1)}‖ = sqrt(2 − 2 r^{n+1}) / C_n`.
pub fn closed_form_error(aligned_overlap: f64, n: usize) -> f64 {
    let r = aligned_overlap;
    (2.0 - 2.0 * r.powi(n as i32 + 1)).max(0.0).sqrt() / normalization(r, n)
}

pub fn catalyst_bound(n: usize) -> f64 {
    2.0 / ((n + 1) as f64).sqrt()
}

/// Number of parties and local dimension of a state with one site per party
/// and equal site dimensions.
pub fn uniform_parties(layout: &SiteLayout) -> Result<(usize, usize)> {
    let dims = layout.site_dims();
    let d = dims[0];
    let one_per_party = layout.party_of_site().iter().enumerate().all(|(s, &p)| s == p);
    if !one_per_party || dims.iter().any(|&x| x != d) {
        return Err(LabError::InvalidLayout(
            "expected one site of equal dimension per party".into(),
        ));
    }
    Ok((layout.n_parties(), d))
}

#[derive(Debug, Clone)]
pub struct CatalystBuildRecord {
    pub n: usize,
    pub lambda: C64,
    pub c_n: f64,
    pub overlap: C64,
    /// `Ω_n(ψ, φ)` on `N` parties with `n` sites each, party-major.
    pub catalyst: ProductSumState,
}

impl CatalystBuildRecord {
    pub fn dense(&self, caps: &Caps) -> Result<PartitionedPureState> {
        self.catalyst.to_dense(caps)
    }
}

/// Palette indices for `ψ` and `φ`; identical inputs share an index so that
/// equal terms cancel exactly.
fn two_vector_palette(psi: &PartitionedPureState, phi: &PartitionedPureState) -> Result<(Arc<Palette>, usize, usize)> {
    let (n_parties, d) = uniform_parties(psi.layout())?;
    psi.layout().ensure_same(phi.layout(), "catalyst inputs")?;
    let same = psi.amplitudes() == phi.amplitudes();
    let mut vectors = vec![psi.amplitudes().to_vec()];
    if !same {
        vectors.push(phi.amplitudes().to_vec());
    }
    let palette = Palette::single_part(d, n_parties, vectors)?;
    Ok((Arc::new(palette), 0, if same { 0 } else { 1 }))
}

/// Per-part sequences for `lead ⊗ a^{⊗j} ⊗ b^{⊗(n−j)}`.
fn sequence(lead: Option<&[usize]>, a: &[usize], b: &[usize], j: usize, n: usize) -> Vec<Vec<usize>> {
    (0..a.len())
        .map(|g| {
            let mut s = Vec::with_capacity(n + 1);
            if let Some(l) = lead {
                s.push(l[g]);
            }
            s.extend(std::iter::repeat_n(a[g], j));
            s.extend(std::iter::repeat_n(b[g], n - j));
            s
        })
        .collect()
}

/// The catalyst terms `Σ_j λ^{n−j}/C_n · a^{⊗j} ⊗ b^{⊗(n−j)}`, optionally
/// preceded by a leading position.
fn catalyst_sum(
    palette: &Arc<Palette>,
    lead: Option<&[usize]>,
    a: &[usize],
    b: &[usize],
    lambda: C64,
    c_n: f64,
    n: usize,
) -> Result<ProductSumState> {
    let positions = n + usize::from(lead.is_some());
    let mut state = ProductSumState::zero(palette.clone(), positions);
    for j in 0..=n {
        let coeff = lambda.powu((n - j) as u32) / c_n;
        state.push_term(coeff, &sequence(lead, a, b, j, n))?;
    }
    Ok(state)
}

pub fn build_catalyst(psi: &PartitionedPureState, phi: &PartitionedPureState, n: usize) -> Result<CatalystBuildRecord> {
    if n == 0 {
        return Err(LabError::InvalidArgument("catalyst length must be at least 1".into()));
    }
    let (palette, a, b) = two_vector_palette(psi, phi)?;
    let overlap = psi.inner(phi)?;
    let lambda = phase_for_overlap(overlap);
    let c_n = normalization((lambda * overlap).re.max(0.0), n);
    let catalyst = catalyst_sum(&palette, None, &[a], &[b], lambda, c_n, n)?;
    Ok(CatalystBuildRecord {
        n,
        lambda,
        c_n,
        overlap,
        catalyst,
    })
}

/// Cyclic right shift of the sites of each listed party (each party must
/// hold the same number of equal-dimension sites), with a global phase.
pub fn cyclic_unitary(layout: &SiteLayout, parties: &[usize], phase: C64) -> Result<SitePermutationUnitary> {
    let sites: Vec<Vec<usize>> = parties.iter().map(|&x| layout.party_sites(x)).collect();
    let len = sites.first().map_or(0, |s| s.len());
    if sites.iter().any(|s| s.len() != len) {
        return Err(LabError::InvalidLayout(
            "shifted parties hold different numbers of sites".into(),
        ));
    }
    for s in &sites {
        let d = layout.site_dims()[s[0]];
        if s.iter().any(|&x| layout.site_dims()[x] != d) {
            return Err(LabError::InvalidPermutation(
                "cyclic shift over sites of unequal dimension".into(),
            ));
        }
    }
    SitePermutationUnitary::cyclic_right(layout.clone(), &sites, phase)
}

/// Catalyst terms over palette indices `a`, `b` (one per part), with the
/// leading position holding `source` on one side and `target` on the other.
pub(crate) struct ShiftSetup<'a> {
    pub palette: &'a Arc<Palette>,
    pub source: &'a [usize],
    pub target: &'a [usize],
    pub a: &'a [usize],
    pub b: &'a [usize],
    pub lambda: C64,
    pub c_n: f64,
    pub n: usize,
    pub shifted: &'a [usize],
    pub phase: C64,
}

impl ShiftSetup<'_> {
    /// `(U(source ⊗ Ω), target ⊗ Ω)`.
    pub(crate) fn sides(&self) -> Result<(ProductSumState, ProductSumState)> {
        let joint = catalyst_sum(self.palette, Some(self.source), self.a, self.b, self.lambda, self.c_n, self.n)?;
        let goal = catalyst_sum(self.palette, Some(self.target), self.a, self.b, self.lambda, self.c_n, self.n)?;
        let u = cyclic_unitary(&joint.layout()?, self.shifted, self.phase)?;
        Ok((joint.apply_permutation(&u)?, goal))
    }

    pub(crate) fn error(&self) -> Result<f64> {
        let (moved, goal) = self.sides()?;
        Ok(moved.sub(&goal)?.merged().norm())
    }
}

fn shifted_sides(
    palette: &Arc<Palette>,
    psi: &[usize],
    phi: &[usize],
    lambda: C64,
    c_n: f64,
    n: usize,
    shifted: &[usize],
) -> Result<(ProductSumState, ProductSumState)> {
    ShiftSetup {
        palette,
        source: psi,
        target: phi,
        a: psi,
        b: phi,
        lambda,
        c_n,
        n,
        shifted,
        phase: lambda.conj(),
    }
    .sides()
}

/// `‖U(ψ ⊗ Ω_n) − φ ⊗ Ω_n‖` with `U = λ̄·(shift)^{⊗N}`.
pub fn embezzle_error(psi: &PartitionedPureState, phi: &PartitionedPureState, n: usize) -> Result<ErrorReport> {
    let record = build_catalyst(psi, phi, n)?;
    let (palette, a, b) = two_vector_palette(psi, phi)?;
    let parties: Vec<usize> = (0..palette.n_parties()).collect();
    let (moved, target) = shifted_sides(&palette, &[a], &[b], record.lambda, record.c_n, n, &parties)?;
    let exact = moved.sub(&target)?.merged().norm();
    let reference = closed_form_error((record.lambda * record.overlap).re.max(0.0), n);
    Ok(ErrorReport {
        exact_error: exact,
        analytic_bound: catalyst_bound(n),
        bound: BoundKind::CatalystShift,
        protocol: Protocol::cyclic("cyclic right shift on every party", record.lambda.conj(), parties, n + 1),
        reference_error: Some(reference),
    })
}

/// Dense oracle for [`embezzle_error`]: builds `ψ ⊗ Ω_n` amplitude by
/// amplitude and applies the shift as an index gather.
pub fn dense_embezzle_error(psi: &PartitionedPureState, phi: &PartitionedPureState, n: usize, caps: &Caps) -> Result<f64> {
    let (n_parties, d) = uniform_parties(psi.layout())?;
    psi.layout().ensure_same(phi.layout(), "catalyst inputs")?;
    let overlap = psi.inner(phi)?;
    let lambda = phase_for_overlap(overlap);
    let c_n = normalization((lambda * overlap).re.max(0.0), n);
    let layout = SiteLayout::party_major(n_parties, n + 1, d)?;
    let dim = caps.check_state(layout.total_dim(), "dense catalyst oracle")?;
    let pos = n + 1;
    let dims = layout.site_dims().to_vec();
    let mut digits = vec![0; dims.len()];
    let mut joint = vec![C64::new(0.0, 0.0); dim];
    let mut target = vec![C64::new(0.0, 0.0); dim];
    let (pa, pb) = (psi.amplitudes(), phi.amplitudes());
    for i in 0..dim {
        digits_of(i, &dims, &mut digits);
        let local: Vec<usize> = (0..pos)
            .map(|p| (0..n_parties).fold(0, |acc, x| acc * d + digits[x * pos + p]))
            .collect();
        for j in 0..=n {
            let coeff = lambda.powu((n - j) as u32) / c_n;
            // joint: ψ at 0..=j, φ after; target: φ, then ψ^{⊗j}, then φ
            let mut a = coeff;
            let mut b = coeff * pb[local[0]];
            for p in 0..pos {
                a *= if p <= j { pa[local[p]] } else { pb[local[p]] };
            }
            for p in 1..pos {
                b *= if p <= j { pa[local[p]] } else { pb[local[p]] };
            }
            joint[i] += a;
            target[i] += b;
        }
    }
    let joint = PartitionedPureState::new(layout.clone(), joint)?;
    let u = cyclic_unitary(&layout, &(0..n_parties).collect::<Vec<_>>(), lambda.conj())?;
    let moved = u.apply_pure(&joint)?;
    Ok(moved
        .amplitudes()
        .iter()
        .zip(&target)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

#[derive(Debug, Clone)]
pub struct LocalSubsetReport {
    /// Error on all `N` parties with the shift acting on the first `L`.
    pub full: ErrorReport,
    /// Error of the `L`-party problem alone.
    pub local: ErrorReport,
}

impl LocalSubsetReport {
    pub fn discrepancy(&self) -> f64 {
        (self.full.exact_error - self.local.exact_error).abs()
    }
}

/// Embezzle `ψ̌ → φ̌` on the first `L` parties of `ψ̌ ⊗ ξ` while the remaining
/// parties hold the spectator `ξ` and do nothing.
pub fn local_subset_error(
    check_psi: &PartitionedPureState,
    check_phi: &PartitionedPureState,
    xi: &PartitionedPureState,
    n: usize,
) -> Result<LocalSubsetReport> {
    if n == 0 {
        return Err(LabError::InvalidArgument("catalyst length must be at least 1".into()));
    }
    let (l, d) = uniform_parties(check_psi.layout())?;
    check_psi.layout().ensure_same(check_phi.layout(), "local inputs")?;
    let (rest, d_xi) = uniform_parties(xi.layout())?;
    if d_xi != d {
        return Err(LabError::LayoutMismatch("spectator has a different local dimension".into()));
    }
    let local = embezzle_error(check_psi, check_phi, n)?;

    let n_parties = l + rest;
    let same = check_psi.amplitudes() == check_phi.amplitudes();
    let mut local_vectors = vec![check_psi.amplitudes().to_vec()];
    if !same {
        local_vectors.push(check_phi.amplitudes().to_vec());
    }
    let palette = Arc::new(Palette::new(
        d,
        vec![(0..l).collect(), (l..n_parties).collect()],
        vec![local_vectors, vec![xi.amplitudes().to_vec()]],
    )?);
    let overlap = check_psi.inner(check_phi)? * xi.inner(xi)?;
    let lambda = phase_for_overlap(overlap);
    let c_n = normalization((lambda * overlap).re.max(0.0), n);
    let (psi_idx, phi_idx) = ([0, 0], [usize::from(!same), 0]);
    let shifted: Vec<usize> = (0..l).collect();
    let (moved, target) = shifted_sides(&palette, &psi_idx, &phi_idx, lambda, c_n, n, &shifted)?;
    let exact = moved.sub(&target)?.merged().norm();
    let full = ErrorReport {
        exact_error: exact,
        analytic_bound: catalyst_bound(n),
        bound: BoundKind::CatalystShift,
        protocol: Protocol::cyclic("cyclic right shift on the first L parties only", lambda.conj(), shifted, n + 1),
        reference_error: Some(local.exact_error),
    };
    Ok(LocalSubsetReport { full, local })
}

#[derive(Debug, Clone)]
pub struct MixedEmbezzleReport {
    /// Trace-norm error of the `L`-party marginal.
    pub marginal: ErrorReport,
    /// Vector error of the purified `N`-party transition.
    pub pure: ErrorReport,
    /// Trace norm between the full final and target pure states.
    pub pure_trace_error: f64,
}

/// Purification of `rho` (on `L` parties of dimension `d`) into the first
/// `2L` of `n_parties` parties; the remaining parties are in `|0⟩`.
pub fn purify(rho: &DensityState, n_parties: usize) -> Result<PartitionedPureState> {
    let (l, d) = uniform_parties(rho.layout())?;
    if 2 * l > n_parties {
        return Err(LabError::InvalidArgument(format!(
            "purifying {l} parties needs at least {} parties, got {n_parties}",
            2 * l
        )));
    }
    let layout = SiteLayout::one_site_per_party(n_parties, d)?;
    let dim = layout.total_dim() as usize;
    let sys = rho.dim();
    let tail = dim / (sys * sys);
    let herm = (rho.matrix() + rho.matrix().adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (k, &w) in eig.eigenvalues.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let s = w.sqrt();
        for a in 0..sys {
            amps[(a * sys + k) * tail] += eig.eigenvectors[(a, k)] * s;
        }
    }
    PartitionedPureState::normalized(layout, amps)
}

/// Embezzle an `L`-party mixed state by purifying source and target across
/// `n_parties ≥ 2L` parties and running the pure catalyst protocol. The
/// source defaults to `|0…0⟩⟨0…0|`.
pub fn purified_mixed_embezzle(
    target: &DensityState,
    source: Option<&DensityState>,
    n: usize,
    n_parties: usize,
    caps: &Caps,
) -> Result<MixedEmbezzleReport> {
    let (l, _) = uniform_parties(target.layout())?;
    let point;
    let source = match source {
        Some(s) => {
            s.layout().ensure_same(target.layout(), "mixed source and target")?;
            s
        }
        None => {
            let mut m = DMatrix::from_element(target.dim(), target.dim(), C64::new(0.0, 0.0));
            m[(0, 0)] = ONE;
            point = DensityState::new(target.layout().clone(), m, caps)?;
            &point
        }
    };
    let psi = purify(source, n_parties)?;
    let phi = purify(target, n_parties)?;
    let pure = embezzle_error(&psi, &phi, n)?;

    let record = build_catalyst(&psi, &phi, n)?;
    let (palette, a, b) = two_vector_palette(&psi, &phi)?;
    let all: Vec<usize> = (0..n_parties).collect();
    let (moved, goal) = shifted_sides(&palette, &[a], &[b], record.lambda, record.c_n, n, &all)?;
    let layout = moved.layout()?;
    let moved = PartitionedPureState::normalized(layout.clone(), moved.to_dense_vector(caps)?)?;
    let goal = PartitionedPureState::normalized(layout.clone(), goal.to_dense_vector(caps)?)?;
    let keep = layout.sites_of_parties(&(0..l).collect::<Vec<_>>());
    let marginal_error = trace_distance(&moved.partial_trace(&keep, caps)?, &goal.partial_trace(&keep, caps)?, caps)?;
    let pure_trace_error = pure_trace_distance(&moved, &goal)?;
    Ok(MixedEmbezzleReport {
        marginal: ErrorReport {
            exact_error: marginal_error,
            analytic_bound: (4.0 / ((n + 1) as f64).sqrt()).min(2.0),
            bound: BoundKind::MarginalTrace,
            protocol: Protocol::cyclic("cyclic right shift on every party of the purified pair", record.lambda.conj(), all, n + 1),
            reference_error: Some(pure_trace_error),
        },
        pure,
        pure_trace_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random::{haar_state, rng_from_seed};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn qubits(n: usize, amps: Vec<C64>) -> PartitionedPureState {
        PartitionedPureState::normalized(SiteLayout::one_site_per_party(n, 2).unwrap(), amps).unwrap()
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase_for_overlap(c(0.5)), ONE);
        assert_eq!(phase_for_overlap(c(0.0)), ONE);
        let ov = C64::new(0.0, 0.5);
        let lambda = phase_for_overlap(ov);
        assert!((lambda * ov).im.abs() < 1e-15 && (lambda * ov).re > 0.0);
    }

    #[test]
    fn normalization_example_and_ends() {
        assert!((normalization(0.5, 2).powi(2) - 5.5).abs() < 1e-14);
        assert!((normalization(0.0, 7) - 8f64.sqrt()).abs() < 1e-14);
        assert!((normalization(1.0, 7) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn equal_inputs_give_product_catalyst_and_zero_error() {
        let psi = qubits(2, vec![c(0.6), c(0.0), C64::new(0.0, 0.8), c(0.0)]);
        let rec = build_catalyst(&psi, &psi, 3).unwrap();
        assert!((rec.c_n - 4.0).abs() < 1e-14);
        let caps = Caps::default();
        let dense = rec.dense(&caps).unwrap();
        assert!((dense.norm() - 1.0).abs() < 1e-12);
        assert_eq!(embezzle_error(&psi, &psi, 3).unwrap().exact_error, 0.0);
    }

    #[test]
    fn orthogonal_inputs_example() {
        let psi = qubits(2, vec![c(1.0), c(0.0), c(0.0), c(0.0)]);
        let phi = qubits(2, vec![c(0.0), c(1.0), c(0.0), c(1.0)]);
        let rep = embezzle_error(&psi, &phi, 3).unwrap();
        assert!((rep.exact_error - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(rep.within_bound());
        let rec = build_catalyst(&psi, &phi, 3).unwrap();
        assert!((rec.c_n - 2.0).abs() < 1e-14);
    }

    #[test]
    fn structured_dense_and_closed_form_agree() {
        let caps = Caps::default();
        let mut rng = rng_from_seed(11);
        let layout = SiteLayout::one_site_per_party(2, 2).unwrap();
        for n in [1, 2, 3, 4] {
            let psi = haar_state(layout.clone(), &mut rng).unwrap();
            let phi = haar_state(layout.clone(), &mut rng).unwrap();
            let rep = embezzle_error(&psi, &phi, n).unwrap();
            let dense = dense_embezzle_error(&psi, &phi, n, &caps).unwrap();
            assert!((rep.exact_error - dense).abs() < 1e-12, "n={n}");
            assert!((rep.exact_error - rep.reference_error.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_unitary_shapes() {
        let layout = SiteLayout::party_major(1, 1, 2).unwrap();
        let u = cyclic_unitary(&layout, &[0], C64::new(0.0, 1.0)).unwrap();
        assert!(u.is_identity());
        let layout = SiteLayout::party_major(2, 2, 3).unwrap();
        let u = cyclic_unitary(&layout, &[0, 1], ONE).unwrap();
        assert_eq!(u.site_map(), &[1, 0, 3, 2]);
        let bad = SiteLayout::new(vec![2, 3], vec![0, 0]).unwrap();
        assert!(cyclic_unitary(&bad, &[0], ONE).is_err());
    }

    #[test]
    fn local_subset_orthogonal_example() {
        let psi = qubits(2, vec![c(1.0), c(0.0), c(0.0), c(0.0)]);
        let phi = qubits(2, vec![c(0.0), c(0.0), c(0.0), c(1.0)]);
        let xi = qubits(1, vec![c(0.6), c(0.8)]);
        let rep = local_subset_error(&psi, &phi, &xi, 3).unwrap();
        assert!((rep.full.exact_error - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(rep.discrepancy() < 1e-12);
        let same = local_subset_error(&psi, &psi, &xi, 3).unwrap();
        assert_eq!(same.full.exact_error, 0.0);
    }

    #[test]
    fn mixed_marginal_example() {
        let caps = Caps::default();
        let layout = SiteLayout::one_site_per_party(1, 2).unwrap();
        let target = DensityState::new(
            layout.clone(),
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5), c(0.5)])),
            &caps,
        )
        .unwrap();
        let rep = purified_mixed_embezzle(&target, None, 8, 2, &caps).unwrap();
        assert!(rep.marginal.exact_error <= 2.0 / 3.0);
        assert!(rep.marginal.exact_error <= rep.pure_trace_error + 1e-12);
        assert!((rep.marginal.exact_error - 0.2901784178317339).abs() < 1e-9);
        let same = purified_mixed_embezzle(&target, Some(&target), 8, 2, &caps).unwrap();
        assert!(same.marginal.exact_error < 1e-12);
    }
}
