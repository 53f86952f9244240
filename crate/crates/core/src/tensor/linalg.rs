//! Reduced states, spectra, distances, and the polar lift of contractions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::layout::SiteLayout;
use super::state::{neumaier_sum, DensityState, DiagonalState, PartitionedPureState, Spectrum};
use crate::caps::Caps;
use crate::error::{LabError, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Reduced state on a subset of sites.
pub trait PartialTrace {
    type Output;

    /// Trace out every site not in `keep_sites`. The kept sites stay in
    /// layout order and their parties are relabeled contiguously.
    fn partial_trace(&self, keep_sites: &[usize], caps: &Caps) -> Result<Self::Output>;
}

struct Split {
    kept_layout: SiteLayout,
    kept_dim: usize,
    rest_dim: usize,
    /// (kept index, traced index) of every full basis index.
    map: Vec<(usize, usize)>,
}

fn split(layout: &SiteLayout, keep_sites: &[usize]) -> Result<Split> {
    if keep_sites.is_empty() {
        return Err(LabError::InvalidArgument("keep set is empty".into()));
    }
    let n = layout.n_sites();
    let mut keep = vec![false; n];
    for &s in keep_sites {
        if s >= n {
            return Err(LabError::InvalidArgument(format!("site {s} out of range")));
        }
        keep[s] = true;
    }
    let dims = layout.site_dims();
    let kept: Vec<usize> = (0..n).filter(|&s| keep[s]).collect();
    let mut relabel: Vec<Option<usize>> = vec![None; layout.n_parties()];
    let mut next = 0;
    let parties = kept
        .iter()
        .map(|&s| {
            let p = layout.party_of_site()[s];
            *relabel[p].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    let kept_layout = SiteLayout::new(kept.iter().map(|&s| dims[s]).collect(), parties)?;
    let kept_dim = kept_layout.total_dim() as usize;
    let total = layout.total_dim() as usize;
    let rest_dim = total / kept_dim;
    let mut digits = vec![0usize; n];
    let mut map = Vec::with_capacity(total);
    for i in 0..total {
        super::layout::digits_of(i, dims, &mut digits);
        let (mut a, mut b) = (0usize, 0usize);
        for s in 0..n {
            if keep[s] {
                a = a * dims[s] + digits[s];
            } else {
                b = b * dims[s] + digits[s];
            }
        }
        map.push((a, b));
    }
    Ok(Split {
        kept_layout,
        kept_dim,
        rest_dim,
        map,
    })
}

impl PartialTrace for PartitionedPureState {
    type Output = DensityState;

    fn partial_trace(&self, keep_sites: &[usize], caps: &Caps) -> Result<DensityState> {
        caps.check_state(self.layout().total_dim(), "partial trace input")?;
        let sp = split(self.layout(), keep_sites)?;
        caps.check_dense(sp.kept_dim as u128, "reduced density")?;
        let mut m = DMatrix::from_element(sp.kept_dim, sp.rest_dim, ZERO);
        for (&amp, &(a, b)) in self.amplitudes().iter().zip(&sp.map) {
            m[(a, b)] = amp;
        }
        let rho = &m * m.adjoint();
        Ok(DensityState::from_parts_unchecked(sp.kept_layout, rho))
    }
}

impl PartialTrace for DensityState {
    type Output = DensityState;

    fn partial_trace(&self, keep_sites: &[usize], caps: &Caps) -> Result<DensityState> {
        let sp = split(self.layout(), keep_sites)?;
        caps.check_dense(sp.kept_dim as u128, "reduced density")?;
        let mut rho = DMatrix::from_element(sp.kept_dim, sp.kept_dim, ZERO);
        let m = self.matrix();
        let total = self.dim();
        for i in 0..total {
            let (a, bi) = sp.map[i];
            for j in 0..total {
                let (c, bj) = sp.map[j];
                if bi == bj {
                    rho[(a, c)] += m[(i, j)];
                }
            }
        }
        Ok(DensityState::from_parts_unchecked(sp.kept_layout, rho))
    }
}

impl PartialTrace for DiagonalState {
    type Output = DiagonalState;

    fn partial_trace(&self, keep_sites: &[usize], caps: &Caps) -> Result<DiagonalState> {
        caps.check_state(self.layout().total_dim(), "diagonal marginal")?;
        let sp = split(self.layout(), keep_sites)?;
        let mut p = vec![0.0; sp.kept_dim];
        for (&x, &(a, _)) in self.probabilities().iter().zip(&sp.map) {
            p[a] += x;
        }
        Ok(DiagonalState::from_parts_unchecked(sp.kept_layout, p))
    }
}

/// Schmidt coefficients (eigenvalues of the reduced density) across the cut
/// between `parties` and the remaining parties.
pub fn schmidt_spectrum(state: &PartitionedPureState, parties: &[usize], caps: &Caps) -> Result<Spectrum> {
    let layout = state.layout();
    let n_parties = layout.n_parties();
    let mut side: Vec<usize> = parties.to_vec();
    side.sort_unstable();
    side.dedup();
    if side.is_empty() || side.len() >= n_parties || side.iter().any(|&x| x >= n_parties) {
        return Err(LabError::InvalidArgument(
            "bipartition must be a proper nonempty subset of the parties".into(),
        ));
    }
    let a_sites = layout.sites_of_parties(&side);
    let b_sites: Vec<usize> = (0..layout.n_sites()).filter(|s| !a_sites.contains(s)).collect();
    let keep = if layout.dim_of(&a_sites) <= layout.dim_of(&b_sites) {
        a_sites
    } else {
        b_sites
    };
    let rho = state.partial_trace(&keep, caps)?;
    Ok(hermitian_eigenvalues(rho.matrix()))
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Spectrum {
    let herm = (m + m.adjoint()).scale(0.5);
    Spectrum::from_unsorted(herm.symmetric_eigenvalues().iter().copied().collect())
}

/// Trace norm of the Hermitian part of `m`.
pub fn hermitian_trace_norm(m: &DMatrix<C64>) -> f64 {
    let herm = (m + m.adjoint()).scale(0.5);
    neumaier_sum(herm.symmetric_eigenvalues().iter().map(|x| x.abs()))
}

/// `‖a − b‖₁` for density matrices (dense eigensolve, capped).
pub fn trace_distance(a: &DensityState, b: &DensityState, caps: &Caps) -> Result<f64> {
    a.layout().ensure_same(b.layout(), "trace distance")?;
    caps.check_dense(a.dim() as u128, "trace distance")?;
    Ok(hermitian_trace_norm(&(a.matrix() - b.matrix())))
}

/// `‖a − b‖₁` for diagonal states: the ℓ1 distance of probability vectors.
pub fn trace_distance_diagonal(a: &DiagonalState, b: &DiagonalState) -> Result<f64> {
    a.layout().ensure_same(b.layout(), "diagonal trace distance")?;
    Ok(l1_distance(a.probabilities(), b.probabilities()))
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    neumaier_sum(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

/// Trace distance of the rank-one projectors: `2·sqrt(1 − |⟨a|b⟩|²)`.
pub fn pure_trace_distance(a: &PartitionedPureState, b: &PartitionedPureState) -> Result<f64> {
    let ov = a.inner(b)?.norm();
    Ok(2.0 * (1.0 - ov * ov).max(0.0).sqrt())
}

/// `Σ |p↓ − q↓|`, the minimum of `‖P − uQu*‖₁` over unitaries `u` for
/// states with spectra `p`, `q`.
pub fn sorted_orbit_distance(p: &Spectrum, q: &Spectrum) -> f64 {
    let len = p.len().max(q.len());
    let (p, q) = (p.padded(len), q.padded(len));
    l1_distance(p.values(), q.values())
}

/// `s = v·a` with `v` an isometry and `a = (s*s)^{1/2}`.
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub isometry: DMatrix<C64>,
    pub positive: DMatrix<C64>,
    pub singular_values: Vec<f64>,
}

/// Singular values below this count as kernel in [`polar_isometry`].
pub const KERNEL_TOL: f64 = 1e-10;

/// Polar decomposition of a contraction `s: C^k → C^m` (`m ≥ k`), completed
/// to an isometry on the kernel of `s`.
///
/// The kernel basis and its images are both produced by Gram–Schmidt over
/// canonical basis vectors, so the completion is deterministic; for a partial
/// permutation matrix the result is the permutation matching kernel basis
/// vectors to uncovered output basis vectors in increasing order.
pub fn polar_isometry(s: &DMatrix<C64>, tolerance: f64) -> Result<PolarDecomposition> {
    let (m, k) = s.shape();
    if m < k {
        return Err(LabError::InvalidArgument(format!(
            "polar lift needs a tall matrix, got {m}x{k}"
        )));
    }
    let svd = s.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or_else(|| LabError::Numerical("SVD without U".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| LabError::Numerical("SVD without V".into()))?;
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let max = sigma.iter().copied().fold(0.0, f64::max);
    if max > 1.0 + tolerance {
        return Err(LabError::NotContraction(max));
    }
    let support: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > KERNEL_TOL).collect();
    let rank = support.len();

    // right singular vectors on the support, as columns
    let row_vecs: Vec<DVector<C64>> = support.iter().map(|&i| v_t.row(i).adjoint()).collect();
    let col_vecs: Vec<DVector<C64>> = support.iter().map(|&i| u.column(i).into_owned()).collect();
    let kernel = complete_basis(&row_vecs, k, k - rank)?;
    let images = complete_basis(&col_vecs, m, k - rank)?;

    let mut iso = DMatrix::from_element(m, k, ZERO);
    for (uc, vc) in col_vecs.iter().zip(&row_vecs) {
        iso += uc * vc.adjoint();
    }
    for (img, ker) in images.iter().zip(&kernel) {
        iso += img * ker.adjoint();
    }
    let mut positive = DMatrix::from_element(k, k, ZERO);
    for (&i, vc) in support.iter().zip(&row_vecs) {
        positive += (vc * vc.adjoint()).scale(sigma[i]);
    }
    Ok(PolarDecomposition {
        isometry: iso,
        positive,
        singular_values: sigma,
    })
}

/// `count` orthonormal vectors of `C^dim` orthogonal to `existing`, taken by
/// Gram–Schmidt over `e_0, e_1, …` in order.
fn complete_basis(existing: &[DVector<C64>], dim: usize, count: usize) -> Result<Vec<DVector<C64>>> {
    let mut basis: Vec<DVector<C64>> = existing.to_vec();
    let mut out = Vec::with_capacity(count);
    for e in 0..dim {
        if out.len() == count {
            break;
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[e] = C64::new(1.0, 0.0);
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= C64::new(norm, 0.0);
            basis.push(v.clone());
            out.push(v);
        }
    }
    if out.len() < count {
        return Err(LabError::Numerical(format!(
            "could only complete {} of {count} basis vectors",
            out.len()
        )));
    }
    Ok(out)
}

/// A 0/1 matrix with at most one nonzero per row and column, stored as the
/// image of each input basis vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialPermutation {
    output_dim: usize,
    image: Vec<Option<usize>>,
}

impl PartialPermutation {
    pub fn new(output_dim: usize, image: Vec<Option<usize>>) -> Result<Self> {
        let mut hit = vec![false; output_dim];
        for &t in image.iter().flatten() {
            if t >= output_dim || hit[t] {
                return Err(LabError::InvalidArgument(format!(
                    "partial permutation is not injective at output {t}"
                )));
            }
            hit[t] = true;
        }
        Ok(PartialPermutation { output_dim, image })
    }

    pub fn input_dim(&self) -> usize {
        self.image.len()
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn image(&self) -> &[Option<usize>] {
        &self.image
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.output_dim, self.image.len(), ZERO);
        for (j, t) in self.image.iter().enumerate() {
            if let Some(i) = t {
                m[(*i, j)] = C64::new(1.0, 0.0);
            }
        }
        m
    }

    /// Polar lift: identical to [`polar_isometry`] on this matrix (kernel
    /// basis vectors, in order, go to uncovered outputs, in order), without
    /// forming it.
    pub fn polar_lift(&self) -> Result<Vec<usize>> {
        if self.output_dim < self.image.len() {
            return Err(LabError::InvalidArgument("partial permutation is not tall".into()));
        }
        let mut hit = vec![false; self.output_dim];
        for &t in self.image.iter().flatten() {
            hit[t] = true;
        }
        let mut free = (0..self.output_dim).filter(|&i| !hit[i]);
        self.image
            .iter()
            .map(|t| match t {
                Some(i) => Ok(*i),
                None => free
                    .next()
                    .ok_or_else(|| LabError::Numerical("no free output for kernel vector".into())),
            })
            .collect()
    }
}
