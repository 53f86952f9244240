//! Spectra of the diagonal catalysts built from a point mass and the
//! uniform distribution.

use serde::{Deserialize, Serialize};

use super::catalyst::{approx_catalyst, site};
use crate::caps::{checked_pow, Caps};
use crate::error::{LabError, Result};
use crate::tensor::state::{neumaier_sum, DiagonalState};

/// Largest `d^n` accepted by [`ltw_spectrum_bruteforce`].
pub const BRUTE_FORCE_CAP: u128 = 1_000_000;

/// Values closer than this are grouped together by the brute-force spectrum.
pub const GROUPING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub lambda: f64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub n: usize,
    pub d: usize,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    pub fn total_multiplicity(&self) -> u64 {
        self.rows.iter().map(|r| r.multiplicity).sum()
    }

    pub fn total_weight(&self) -> f64 {
        neumaier_sum(self.rows.iter().map(|r| r.lambda * r.multiplicity as f64))
    }
}

fn check(n: usize, d: usize) -> Result<()> {
    if n < 2 || d < 2 {
        return Err(LabError::InvalidArgument(format!("need n, d >= 2, got n={n}, d={d}")));
    }
    if n > 62 || checked_pow(d, n) > u64::MAX as u128 {
        return Err(LabError::InvalidArgument(format!("d^n overflows for n={n}, d={d}")));
    }
    Ok(())
}

/// `λ_j^{(n,d)}` alone, valid for every `n, d >= 2` (no multiplicities).
pub fn ltw_eigenvalue(n: usize, d: usize, j: usize) -> f64 {
    let df = d as f64;
    (df / (df - 1.0)) * (df.powi(-(j as i32)) - df.powi(-(n as i32))) / (n as f64 - 1.0)
}

/// `λ_j = (1/(n−1))·(d/(d−1))·(d^{−j} − d^{−n})`, `m_j = (d−1)d^{j−1} + δ_{j1}`.
pub fn ltw_spectrum_closed_form(n: usize, d: usize) -> Result<SpectrumTable> {
    check(n, d)?;
    let rows = (1..=n)
        .map(|j| SpectrumRow {
            lambda: ltw_eigenvalue(n, d, j),
            multiplicity: (d as u64 - 1) * (d as u64).pow(j as u32 - 1) + u64::from(j == 1),
        })
        .collect();
    Ok(SpectrumTable { n, d, rows })
}

/// Sorted and grouped probabilities of the point-mass → uniform catalyst.
pub fn ltw_spectrum_bruteforce(n: usize, d: usize) -> Result<SpectrumTable> {
    check(n, d)?;
    let dim = checked_pow(d, n);
    if dim > BRUTE_FORCE_CAP {
        return Err(LabError::DimensionOverCap {
            requested: dim,
            cap: BRUTE_FORCE_CAP,
            context: "brute-force catalyst spectrum",
        });
    }
    let caps = Caps::default();
    let point = DiagonalState::point_mass(site(d)?, 0)?;
    let uniform = DiagonalState::uniform(site(d)?);
    let omega = approx_catalyst(&point, &uniform, n, &caps)?;
    let mut rows: Vec<SpectrumRow> = Vec::new();
    let mut lead = f64::NAN;
    for &v in omega.spectrum().values() {
        match rows.last_mut() {
            Some(r) if (lead - v).abs() <= GROUPING_TOL => r.multiplicity += 1,
            _ => {
                lead = v;
                rows.push(SpectrumRow {
                    lambda: v,
                    multiplicity: 1,
                })
            }
        }
    }
    Ok(SpectrumTable { n, d, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let t = ltw_spectrum_closed_form(2, 2).unwrap();
        assert_eq!(
            t.rows,
            vec![
                SpectrumRow { lambda: 0.5, multiplicity: 2 },
                SpectrumRow { lambda: 0.0, multiplicity: 2 }
            ]
        );
        let t = ltw_spectrum_closed_form(3, 2).unwrap();
        let got: Vec<(f64, u64)> = t.rows.iter().map(|r| (r.lambda, r.multiplicity)).collect();
        assert_eq!(got, vec![(0.375, 2), (0.125, 2), (0.0, 4)]);
        assert!(ltw_spectrum_closed_form(1, 2).is_err());
    }

    #[test]
    fn brute_force_matches_closed_form() {
        for (n, d) in [(2, 2), (6, 2), (4, 3), (5, 3)] {
            let a = ltw_spectrum_closed_form(n, d).unwrap();
            let b = ltw_spectrum_bruteforce(n, d).unwrap();
            assert_eq!(a.rows.len(), b.rows.len());
            for (x, y) in a.rows.iter().zip(&b.rows) {
                assert_eq!(x.multiplicity, y.multiplicity);
                assert!((x.lambda - y.lambda).abs() < 1e-12);
            }
            assert_eq!(a.total_multiplicity(), (d as u64).pow(n as u32));
            assert!((a.total_weight() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn brute_force_cap() {
        assert!(matches!(
            ltw_spectrum_bruteforce(21, 2),
            Err(LabError::DimensionOverCap { .. })
        ));
    }
}
