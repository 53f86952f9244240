use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::layout::SiteLayout;
use crate::caps::Caps;
use crate::error::{LabError, Result};

/// Normalization tolerance enforced at construction time.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity / positivity / trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

/// Unit vector over a [`SiteLayout`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionedPureState {
    layout: SiteLayout,
    amplitudes: Vec<C64>,
}

impl PartitionedPureState {
    pub fn new(layout: SiteLayout, amplitudes: Vec<C64>) -> Result<Self> {
        check_len(&layout, amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(LabError::NotNormalized { norm });
        }
        Ok(PartitionedPureState { layout, amplitudes })
    }

    /// Rescale `amplitudes` to unit norm.
    pub fn normalized(layout: SiteLayout, mut amplitudes: Vec<C64>) -> Result<Self> {
        check_len(&layout, amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(LabError::NotNormalized { norm });
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(PartitionedPureState { layout, amplitudes })
    }

    pub fn basis(layout: SiteLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index as u128 >= dim {
            return Err(LabError::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim as usize];
        amps[index] = C64::new(1.0, 0.0);
        Ok(PartitionedPureState {
            layout,
            amplitudes: amps,
        })
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &PartitionedPureState) -> Result<C64> {
        self.layout.ensure_same(&other.layout, "inner product")?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// `self ⊗ other` with `other`'s sites appended after `self`'s.
    pub fn tensor(&self, other: &PartitionedPureState, caps: &Caps) -> Result<Self> {
        let layout = self.layout.tensor(&other.layout)?;
        caps.check_state(layout.total_dim(), "pure tensor product")?;
        Ok(PartitionedPureState {
            layout,
            amplitudes: kron(&self.amplitudes, &other.amplitudes),
        })
    }

    /// Scalar multiple; the scalar must have unit modulus.
    pub fn with_phase(&self, phase: C64) -> Self {
        PartitionedPureState {
            layout: self.layout.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }

    pub fn to_density(&self, caps: &Caps) -> Result<DensityState> {
        let n = caps.check_dense(self.dim() as u128, "rank-one density")?;
        let v = &self.amplitudes;
        let matrix = DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Ok(DensityState {
            layout: self.layout.clone(),
            matrix,
        })
    }

    pub(crate) fn from_parts_unchecked(layout: SiteLayout, amplitudes: Vec<C64>) -> Self {
        PartitionedPureState { layout, amplitudes }
    }
}

/// Probability vector over a [`SiteLayout`] (a state diagonal in the
/// computational basis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalState {
    layout: SiteLayout,
    probabilities: Vec<f64>,
}

impl DiagonalState {
    pub fn new(layout: SiteLayout, probabilities: Vec<f64>) -> Result<Self> {
        check_len(&layout, probabilities.len())?;
        if let Some(p) = probabilities.iter().find(|p| p.is_nan() || **p < 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "negative or non-finite probability {p}"
            )));
        }
        let sum = neumaier_sum(probabilities.iter().copied());
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(LabError::NotNormalized { norm: sum });
        }
        Ok(DiagonalState {
            layout,
            probabilities,
        })
    }

    pub fn point_mass(layout: SiteLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index as u128 >= dim {
            return Err(LabError::InvalidArgument(format!(
                "index {index} out of range for dimension {dim}"
            )));
        }
        let mut p = vec![0.0; dim as usize];
        p[index] = 1.0;
        Ok(DiagonalState {
            layout,
            probabilities: p,
        })
    }

    pub fn uniform(layout: SiteLayout) -> Self {
        let dim = layout.total_dim() as usize;
        DiagonalState {
            layout,
            probabilities: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn dim(&self) -> usize {
        self.probabilities.len()
    }

    pub fn tensor(&self, other: &DiagonalState, caps: &Caps) -> Result<Self> {
        let layout = self.layout.tensor(&other.layout)?;
        caps.check_state(layout.total_dim(), "diagonal tensor product")?;
        let mut p = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.probabilities {
            p.extend(other.probabilities.iter().map(|&b| a * b));
        }
        Ok(DiagonalState {
            layout,
            probabilities: p,
        })
    }

    pub fn to_density(&self, caps: &Caps) -> Result<DensityState> {
        let n = caps.check_dense(self.dim() as u128, "diagonal densification")?;
        let mut matrix = DMatrix::zeros(n, n);
        for (i, &p) in self.probabilities.iter().enumerate() {
            matrix[(i, i)] = C64::new(p, 0.0);
        }
        Ok(DensityState {
            layout: self.layout.clone(),
            matrix,
        })
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_unsorted(self.probabilities.clone())
    }

    pub(crate) fn from_parts_unchecked(layout: SiteLayout, probabilities: Vec<f64>) -> Self {
        DiagonalState {
            layout,
            probabilities,
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix over a [`SiteLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    layout: SiteLayout,
    matrix: DMatrix<C64>,
}

impl DensityState {
    pub fn new(layout: SiteLayout, matrix: DMatrix<C64>, caps: &Caps) -> Result<Self> {
        let n = caps.check_dense(layout.total_dim(), "density state")?;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(LabError::InvalidDensity(format!(
                "matrix is {}x{} but layout dimension is {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm_dev = max_abs(&(&matrix - matrix.adjoint()));
        if herm_dev > DENSITY_TOL {
            return Err(LabError::InvalidDensity(format!(
                "not Hermitian (deviation {herm_dev:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
            return Err(LabError::InvalidDensity(format!("trace {trace} != 1")));
        }
        let eig = matrix.clone().symmetric_eigenvalues();
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -DENSITY_TOL {
            return Err(LabError::InvalidDensity(format!(
                "not positive (minimum eigenvalue {min:e})"
            )));
        }
        Ok(DensityState { layout, matrix })
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Diagonal density `diag(probabilities)`.
    pub fn from_diagonal(state: &DiagonalState, caps: &Caps) -> Result<Self> {
        state.to_density(caps)
    }

    pub fn eigenvalues(&self) -> Spectrum {
        Spectrum::from_unsorted(self.matrix.clone().symmetric_eigenvalues().iter().copied().collect())
    }

    pub(crate) fn from_parts_unchecked(layout: SiteLayout, matrix: DMatrix<C64>) -> Self {
        DensityState { layout, matrix }
    }
}

/// Nonincreasing list of nonnegative reals (Schmidt coefficients, eigenvalues).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Accepts an already sorted nonnegative list.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(LabError::InvalidArgument(
                "spectrum entries must be nonnegative".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(LabError::InvalidArgument(
                "spectrum must be nonincreasing".into(),
            ));
        }
        Ok(Spectrum { values })
    }

    /// Sort nonincreasing; round-off negatives (above -1e-12) are clamped to 0.
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        for v in &mut values {
            if *v < 0.0 && *v > -NORM_TOL {
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Spectrum { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        neumaier_sum(self.values.iter().copied())
    }

    /// Zero-padded to `len` entries (no-op if already longer).
    pub fn padded(&self, len: usize) -> Spectrum {
        let mut values = self.values.clone();
        if values.len() < len {
            values.resize(len, 0.0);
        }
        Spectrum { values }
    }

    /// Spectrum of the tensor product.
    pub fn tensor(&self, other: &Spectrum) -> Spectrum {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for &a in &self.values {
            out.extend(other.values.iter().map(|&b| a * b));
        }
        Spectrum::from_unsorted(out)
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn check_len(layout: &SiteLayout, len: usize) -> Result<()> {
    if layout.total_dim() != len as u128 {
        return Err(LabError::LayoutMismatch(format!(
            "vector of length {len} for layout of dimension {}",
            layout.total_dim()
        )));
    }
    Ok(())
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn l2_norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn kron(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit() -> SiteLayout {
        SiteLayout::one_site_per_party(1, 2).unwrap()
    }

    #[test]
    fn pure_state_requires_unit_norm() {
        let amps = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(PartitionedPureState::new(qubit(), amps.clone()).is_err());
        let s = PartitionedPureState::normalized(qubit(), amps).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_rejects_negative_and_unnormalized() {
        assert!(DiagonalState::new(qubit(), vec![1.5, -0.5]).is_err());
        assert!(DiagonalState::new(qubit(), vec![0.5, 0.4]).is_err());
        assert!(DiagonalState::new(qubit(), vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn density_validation() {
        let caps = Caps::default();
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.2, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.2, 0.0)],
        );
        assert!(matches!(
            DensityState::new(qubit(), m, &caps),
            Err(LabError::InvalidDensity(_))
        ));
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(0.1, 0.2), C64::new(0.1, 0.0), C64::new(0.5, 0.0)],
        );
        assert!(DensityState::new(qubit(), m, &caps).is_err());
    }

    #[test]
    fn spectrum_sorting_and_tensor() {
        let s = Spectrum::from_unsorted(vec![0.25, 0.75, -1e-15]);
        assert_eq!(s.values(), &[0.75, 0.25, 0.0]);
        assert!(Spectrum::new(vec![0.2, 0.8]).is_err());
        let t = Spectrum::new(vec![0.5, 0.5]).unwrap().tensor(&Spectrum::new(vec![1.0]).unwrap());
        assert_eq!(t.values(), &[0.5, 0.5]);
        assert_eq!(t.padded(4).values(), &[0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let v: Vec<f64> = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 10_000)).collect();
        assert!((neumaier_sum(v.iter().copied()) - (1.0 + 1e-12)).abs() < 1e-18);
    }
}
