//! The counting `k ↦ (d_k, n_k)` of all pairs with `d, n ≥ 2`.
//!
//! Round `r` (1-based) emits, in lexicographic order, every pair whose larger
//! entry is `m = r + 1`: first `(2, m), …, (m−1, m)`, then `(m, 2), …, (m, m)`.
//! Rounds have `2r − 1` entries, so round `r` ends at index `r²` and both the
//! entry at a given index and the index of a given pair have closed forms.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountingEntry {
    /// 1-based position in the counting.
    pub k: usize,
    pub d: usize,
    pub n: usize,
}

/// Entry `k` (1-based).
pub fn counting_entry(k: usize) -> Result<CountingEntry> {
    if k == 0 {
        return Err(LabError::InvalidArgument("counting indices start at 1".into()));
    }
    let mut r = (k as f64).sqrt().ceil() as usize;
    while r * r < k {
        r += 1;
    }
    while r > 1 && (r - 1) * (r - 1) >= k {
        r -= 1;
    }
    let m = r + 1;
    let t = k - (r - 1) * (r - 1) - 1;
    let (d, n) = if t < m - 2 { (2 + t, m) } else { (m, 2 + t - (m - 2)) };
    Ok(CountingEntry { k, d, n })
}

/// Index of `(d, n)` in the counting.
pub fn counting_index(d: usize, n: usize) -> Result<usize> {
    if d < 2 || n < 2 {
        return Err(LabError::InvalidArgument(format!(
            "counting covers d, n >= 2, got ({d}, {n})"
        )));
    }
    let m = d.max(n);
    let t = if d < m { d - 2 } else { (m - 2) + (n - 2) };
    Ok((m - 2) * (m - 2) + t + 1)
}

/// The first `len` entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCounting {
    pub entries: Vec<CountingEntry>,
}

pub fn family_counting(len: usize) -> Result<FamilyCounting> {
    if len == 0 {
        return Err(LabError::InvalidArgument("counting prefix must be nonempty".into()));
    }
    let entries = (1..=len).map(counting_entry).collect::<Result<_>>()?;
    Ok(FamilyCounting { entries })
}

/// Least `k ≥ k_min` with `d_k = d` and `n_k ≥ n_min`.
pub fn least_level(d: usize, n_min: usize, k_min: usize) -> Result<usize> {
    // for fixed d the index increases with n
    let mut n = n_min.max(2);
    loop {
        let k = counting_index(d, n)?;
        if k >= k_min {
            return Ok(k);
        }
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn opening_entries() {
        let c = family_counting(9).unwrap();
        let pairs: Vec<(usize, usize)> = c.entries.iter().map(|e| (e.d, e.n)).collect();
        assert_eq!(
            pairs,
            vec![(2, 2), (2, 3), (3, 2), (3, 3), (2, 4), (3, 4), (4, 2), (4, 3), (4, 4)]
        );
    }

    #[test]
    fn schedule_revisit_example() {
        let k = least_level(2, 3, 1).unwrap();
        let e = counting_entry(k).unwrap();
        assert_eq!((e.d, e.n, e.k), (2, 3, 2));
    }

    #[test]
    fn rejects_invalid() {
        assert!(counting_entry(0).is_err());
        assert!(counting_index(1, 4).is_err());
        assert!(family_counting(0).is_err());
    }

    #[test]
    fn enumeration_matches_rounds_up_to_a_thousand() {
        let mut k = 0;
        let mut seen = std::collections::HashSet::new();
        for r in 1.. {
            let m = r + 1;
            let round: Vec<(usize, usize)> =
                (2..m).map(|d| (d, m)).chain((2..=m).map(|n| (m, n))).collect();
            for (d, n) in round {
                k += 1;
                if k > 1000 {
                    return;
                }
                let e = counting_entry(k).unwrap();
                assert_eq!((e.d, e.n), (d, n));
                assert!(seen.insert((d, n)));
            }
        }
    }

    proptest! {
        #[test]
        fn index_inverts_entry(k in 1usize..1_000_000) {
            let e = counting_entry(k).unwrap();
            prop_assert_eq!(counting_index(e.d, e.n).unwrap(), k);
        }

        #[test]
        fn every_pair_recurs_with_larger_n(d in 2usize..40, n in 2usize..200, k0 in 1usize..5000) {
            let k = least_level(d, n, k0).unwrap();
            let e = counting_entry(k).unwrap();
            prop_assert!(k >= k0);
            prop_assert_eq!(e.d, d);
            prop_assert!(e.n >= n);
            // minimality over the stretch below k
            for j in k0..k {
                let f = counting_entry(j).unwrap();
                prop_assert!(!(f.d == d && f.n >= n));
            }
        }
    }
}
