//! Rational approximation of probability vectors that sum to one exactly.

use num_rational::Ratio;

use crate::error::{LabError, Result};

pub type Rational = Ratio<u64>;

/// Default largest denominator for a single entry.
pub const DEFAULT_DENOMINATOR_CAP: u64 = 1_000_000;

/// First continued-fraction convergent of `x ∈ [0, 1]` within `tol`, with
/// denominator at most `cap`.
pub fn convergent_within(x: f64, tol: f64, cap: u64) -> Option<Rational> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut rest = x;
    loop {
        let a = rest.floor();
        if a > u64::MAX as f64 / 2.0 {
            return None;
        }
        let a = a as u64;
        let h = a.checked_mul(h1)?.checked_add(h0)?;
        let k = a.checked_mul(k1)?.checked_add(k0)?;
        if k > cap {
            return None;
        }
        if (h as f64 / k as f64 - x).abs() <= tol {
            return Some(Rational::new(h, k));
        }
        let frac = rest - a as f64;
        if frac <= 0.0 {
            return None;
        }
        rest = 1.0 / frac;
        (h0, h1, k0, k1) = (h1, h, k1, k);
    }
}

/// Rationals `p_j/q_j` with `|p_j/q_j − λ_j| ≤ tolerance` and exact sum 1.
/// Every entry but the largest is approximated within `tolerance/len`; the
/// largest absorbs the remainder.
pub fn rationalize_spectrum(values: &[f64], tolerance: f64, denominator_cap: u64) -> Result<Vec<Rational>> {
    if values.is_empty() || values.iter().any(|&x| !(0.0..=1.0 + 1e-12).contains(&x)) {
        return Err(LabError::Rationalization("entries must lie in [0, 1]".into()));
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(LabError::Rationalization(format!("entries sum to {sum}, not 1")));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(LabError::Rationalization("tolerance must be positive".into()));
    }
    let largest = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &x)| if x > values[best] { i } else { best });
    let per_entry = tolerance / values.len() as f64;
    let mut out = vec![Rational::new(0, 1); values.len()];
    let mut rest = Rational::new(1, 1);
    for (i, &x) in values.iter().enumerate() {
        if i == largest {
            continue;
        }
        let r = convergent_within(x, per_entry, denominator_cap).ok_or_else(|| {
            LabError::Rationalization(format!(
                "no convergent of {x} within {per_entry:e} has denominator <= {denominator_cap}"
            ))
        })?;
        if r > rest {
            return Err(LabError::Rationalization("approximations exceed 1".into()));
        }
        rest -= r;
        out[i] = r;
    }
    out[largest] = rest;
    let approx = *rest.numer() as f64 / *rest.denom() as f64;
    if (approx - values[largest]).abs() > tolerance {
        return Err(LabError::Rationalization(format!(
            "largest entry moved by {:e}",
            (approx - values[largest]).abs()
        )));
    }
    Ok(out)
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum(rs: &[Rational]) -> Rational {
        rs.iter().fold(Rational::new(0, 1), |a, b| a + b)
    }

    #[test]
    fn exact_inputs_stay_exact() {
        let r = rationalize_spectrum(&[0.5, 0.5], 1e-9, DEFAULT_DENOMINATOR_CAP).unwrap();
        assert_eq!(r, vec![Rational::new(1, 2), Rational::new(1, 2)]);
        let r = rationalize_spectrum(&[2.0 / 3.0, 1.0 / 3.0], 1e-9, DEFAULT_DENOMINATOR_CAP).unwrap();
        assert_eq!(r, vec![Rational::new(2, 3), Rational::new(1, 3)]);
    }

    #[test]
    fn inverse_pi_pair() {
        let x = 1.0 / std::f64::consts::PI;
        let r = rationalize_spectrum(&[1.0 - x, x], 1e-3, DEFAULT_DENOMINATOR_CAP).unwrap();
        assert_eq!(r, vec![Rational::new(15, 22), Rational::new(7, 22)]);
        assert_eq!(sum(&r), Rational::new(1, 1));
        assert!(r.iter().all(|q| *q.denom() <= 1000));
    }

    #[test]
    fn denominator_cap_is_enforced() {
        let x = 1.0 / std::f64::consts::PI;
        assert!(matches!(
            rationalize_spectrum(&[1.0 - x, x], 1e-12, 100),
            Err(LabError::Rationalization(_))
        ));
        assert!(rationalize_spectrum(&[0.7, 0.7], 1e-3, 100).is_err());
    }
}
