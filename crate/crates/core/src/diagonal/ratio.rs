//! Eigenvalue-ratio probes between catalyst factors of different local
//! dimension.

use serde::{Deserialize, Serialize};

use super::spectrum::ltw_eigenvalue;
use crate::error::{LabError, Result};
use crate::tensor::state::neumaier_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub n: usize,
    /// `λ_1^{(n,d2)} / λ_1^{(n,d1)}` from the spectra.
    pub ratio: f64,
    /// `((d1−1)/(d2−1))·(1 − d2^{1−n})/(1 − d1^{1−n})`.
    pub ratio_closed_form: f64,
    /// `Σ_{ν=2}^{n} min(d1,d2)·λ_1^{(ν,d1)}`.
    pub partial_sum: f64,
    /// `(min(d1,d2)/d1)·h_{n−1}`, a lower bound on the partial sum.
    pub harmonic_lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioProbeReport {
    pub d1: usize,
    pub d2: usize,
    pub limit: f64,
    pub rows: Vec<RatioRow>,
}

pub fn ratio_closed_form(d1: usize, d2: usize, n: usize) -> f64 {
    let (a, b) = (d1 as f64, d2 as f64);
    let e = 1 - n as i32;
    ((a - 1.0) / (b - 1.0)) * (1.0 - b.powi(e)) / (1.0 - a.powi(e))
}

pub fn ratio_probe(d1: usize, d2: usize, n_max: usize) -> Result<RatioProbeReport> {
    if d1 < 2 || d2 < 2 || n_max < 2 {
        return Err(LabError::InvalidArgument(format!(
            "need d1, d2, n_max >= 2, got ({d1}, {d2}, {n_max})"
        )));
    }
    let width = d1.min(d2) as f64;
    let mut terms = Vec::with_capacity(n_max);
    let mut harmonic = Vec::with_capacity(n_max);
    let mut rows = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        let top1 = ltw_eigenvalue(n, d1, 1);
        let top2 = ltw_eigenvalue(n, d2, 1);
        terms.push(width * top1);
        harmonic.push(1.0 / (n - 1) as f64);
        rows.push(RatioRow {
            n,
            ratio: top2 / top1,
            ratio_closed_form: ratio_closed_form(d1, d2, n),
            partial_sum: neumaier_sum(terms.iter().copied()),
            harmonic_lower_bound: width / d1 as f64 * neumaier_sum(harmonic.iter().copied()),
        });
    }
    Ok(RatioProbeReport {
        d1,
        d2,
        limit: (d1 as f64 - 1.0) / (d2 as f64 - 1.0),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_dimensions_give_unit_ratio() {
        let rep = ratio_probe(3, 3, 10).unwrap();
        assert!(rep.rows.iter().all(|r| r.ratio == 1.0));
    }

    #[test]
    fn two_three_converges_to_half() {
        let rep = ratio_probe(2, 3, 50).unwrap();
        assert_eq!(rep.limit, 0.5);
        let at20 = rep.rows.iter().find(|r| r.n == 20).unwrap();
        assert!((at20.ratio - 0.5).abs() < 1e-5);
        for r in &rep.rows {
            assert!((r.ratio - r.ratio_closed_form).abs() < 1e-14);
            assert!(r.partial_sum >= r.harmonic_lower_bound - 1e-12);
        }
        assert!(rep.rows.windows(2).all(|w| w[1].partial_sum > w[0].partial_sum));
        assert!(rep
            .rows
            .windows(2)
            .take(40)
            .all(|w| (w[1].ratio - 0.5).abs() < (w[0].ratio - 0.5).abs()));
        assert!(rep.rows.last().unwrap().partial_sum > 3.0);
    }

    #[test]
    fn equal_limits_agree() {
        let a = ratio_probe(2, 3, 30).unwrap();
        let b = ratio_probe(3, 5, 30).unwrap();
        assert_eq!(a.limit, b.limit);
        let (x, y) = (a.rows.last().unwrap().ratio, b.rows.last().unwrap().ratio);
        assert!((x - y).abs() < 1e-5);
    }
}
