use serde::{Deserialize, Serialize};

use crate::caps::checked_pow;
use crate::error::{LabError, Result};

/// Ordered list of qudit sites, each owned by exactly one party.
///
/// Basis indices are mixed-radix with the leftmost site most significant.
/// Parties are numbered `0..n_parties` and every party owns at least one site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteLayout {
    site_dims: Vec<usize>,
    party_of_site: Vec<usize>,
}

impl SiteLayout {
    pub fn new(site_dims: Vec<usize>, party_of_site: Vec<usize>) -> Result<Self> {
        if site_dims.is_empty() {
            return Err(LabError::InvalidLayout("layout has no sites".into()));
        }
        if site_dims.len() != party_of_site.len() {
            return Err(LabError::InvalidLayout(format!(
                "{} site dimensions but {} party labels",
                site_dims.len(),
                party_of_site.len()
            )));
        }
        if let Some(s) = site_dims.iter().position(|&d| d == 0) {
            return Err(LabError::InvalidLayout(format!("site {s} has dimension 0")));
        }
        let n_parties = party_of_site.iter().max().map_or(0, |&p| p + 1);
        let mut seen = vec![false; n_parties];
        for &p in &party_of_site {
            seen[p] = true;
        }
        if let Some(p) = seen.iter().position(|&s| !s) {
            return Err(LabError::InvalidLayout(format!(
                "party labels are not contiguous: party {p} owns no site"
            )));
        }
        Ok(SiteLayout {
            site_dims,
            party_of_site,
        })
    }

    /// `n_parties` parties, each owning `sites_per_party` sites of dimension
    /// `d`, grouped party-major.
    pub fn party_major(n_parties: usize, sites_per_party: usize, d: usize) -> Result<Self> {
        let dims = vec![d; n_parties * sites_per_party];
        let parties = (0..n_parties)
            .flat_map(|x| std::iter::repeat_n(x, sites_per_party))
            .collect();
        SiteLayout::new(dims, parties)
    }

    /// One site of dimension `d` per party.
    pub fn one_site_per_party(n_parties: usize, d: usize) -> Result<Self> {
        SiteLayout::party_major(n_parties, 1, d)
    }

    pub fn n_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn n_parties(&self) -> usize {
        self.party_of_site.iter().max().map_or(0, |&p| p + 1)
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn party_of_site(&self) -> &[usize] {
        &self.party_of_site
    }

    /// Product of all site dimensions, saturating at `u128::MAX`.
    pub fn total_dim(&self) -> u128 {
        self.site_dims
            .iter()
            .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
            .unwrap_or(u128::MAX)
    }

    /// Sites owned by `party`, in layout order.
    pub fn party_sites(&self, party: usize) -> Vec<usize> {
        (0..self.n_sites())
            .filter(|&s| self.party_of_site[s] == party)
            .collect()
    }

    /// Sites owned by any party in `parties`, in layout order.
    pub fn sites_of_parties(&self, parties: &[usize]) -> Vec<usize> {
        (0..self.n_sites())
            .filter(|&s| parties.contains(&self.party_of_site[s]))
            .collect()
    }

    /// Mixed-radix strides (leftmost site most significant).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.n_sites()];
        for s in (0..self.n_sites().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * self.site_dims[s + 1];
        }
        strides
    }

    /// Product of the dimensions of `sites`.
    pub fn dim_of(&self, sites: &[usize]) -> u128 {
        sites
            .iter()
            .try_fold(1u128, |acc, &s| acc.checked_mul(self.site_dims[s] as u128))
            .unwrap_or(u128::MAX)
    }

    /// Concatenate two layouts; the parties of `other` keep their labels, so
    /// `self ⊗ other` over the same party set merges sites per party.
    pub fn tensor(&self, other: &SiteLayout) -> Result<SiteLayout> {
        let mut dims = self.site_dims.clone();
        dims.extend_from_slice(&other.site_dims);
        let mut parties = self.party_of_site.clone();
        parties.extend_from_slice(&other.party_of_site);
        SiteLayout::new(dims, parties)
    }

    pub(crate) fn ensure_same(&self, other: &SiteLayout, what: &str) -> Result<()> {
        if self != other {
            return Err(LabError::LayoutMismatch(what.to_string()));
        }
        Ok(())
    }
}

/// `d^n` as a checked product, used for uniform layouts.
pub fn uniform_dim(d: usize, n: usize) -> u128 {
    checked_pow(d, n)
}

/// Decompose `index` into per-site digits for `dims` (leftmost most significant).
pub fn digits_of(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for s in (0..dims.len()).rev() {
        out[s] = index % dims[s];
        index /= dims[s];
    }
}

/// Inverse of [`digits_of`].
pub fn index_of(digits: &[usize], dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(dims)
        .fold(0usize, |acc, (&x, &d)| acc * d + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn party_major_groups_sites() {
        let l = SiteLayout::party_major(3, 2, 2).unwrap();
        assert_eq!(l.party_of_site(), &[0, 0, 1, 1, 2, 2]);
        assert_eq!(l.party_sites(1), vec![2, 3]);
        assert_eq!(l.total_dim(), 64);
        assert_eq!(l.strides(), vec![32, 16, 8, 4, 2, 1]);
    }

    #[test]
    fn rejects_gap_in_parties() {
        assert!(SiteLayout::new(vec![2, 2], vec![0, 2]).is_err());
        assert!(SiteLayout::new(vec![2, 0], vec![0, 1]).is_err());
        assert!(SiteLayout::new(vec![], vec![]).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let dims = [2, 3, 4];
        let mut digits = [0; 3];
        for i in 0..24 {
            digits_of(i, &dims, &mut digits);
            assert_eq!(index_of(&digits, &dims), i);
        }
        digits_of(23, &dims, &mut digits);
        assert_eq!(digits, [1, 2, 3]);
    }
}
