use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::layout::SiteLayout;
use super::state::{DiagonalState, PartitionedPureState};
use crate::error::{LabError, Result};

/// A unitary that relabels sites, times a global phase.
///
/// Site `s` of the input is carried to site `site_map[s]` of the output:
/// the output amplitude at multi-index `i` equals `global_phase` times the
/// input amplitude at the multi-index `j` with `j[s] = i[site_map[s]]`.
/// Never materialized as a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SitePermutationUnitary {
    layout: SiteLayout,
    site_map: Vec<usize>,
    global_phase: C64,
}

impl SitePermutationUnitary {
    pub fn new(layout: SiteLayout, site_map: Vec<usize>, global_phase: C64) -> Result<Self> {
        let n = layout.n_sites();
        if site_map.len() != n {
            return Err(LabError::InvalidPermutation(format!(
                "site map has {} entries for {n} sites",
                site_map.len()
            )));
        }
        let mut hit = vec![false; n];
        for (s, &t) in site_map.iter().enumerate() {
            if t >= n || hit[t] {
                return Err(LabError::InvalidPermutation(format!(
                    "site map is not a bijection (site {s} -> {t})"
                )));
            }
            hit[t] = true;
            if layout.site_dims()[s] != layout.site_dims()[t] {
                return Err(LabError::InvalidPermutation(format!(
                    "site {s} (dim {}) mapped to site {t} (dim {})",
                    layout.site_dims()[s],
                    layout.site_dims()[t]
                )));
            }
        }
        if (global_phase.norm() - 1.0).abs() > 1e-12 {
            return Err(LabError::InvalidPermutation(format!(
                "global phase {global_phase} is not unit modulus"
            )));
        }
        Ok(SitePermutationUnitary {
            layout,
            site_map,
            global_phase,
        })
    }

    pub fn identity(layout: SiteLayout, global_phase: C64) -> Result<Self> {
        let map = (0..layout.n_sites()).collect();
        SitePermutationUnitary::new(layout, map, global_phase)
    }

    /// Cyclic right shift within each group: `group[p] -> group[p + 1]`,
    /// last to first. Sites outside the groups are fixed.
    pub fn cyclic_right(layout: SiteLayout, groups: &[Vec<usize>], global_phase: C64) -> Result<Self> {
        let mut map: Vec<usize> = (0..layout.n_sites()).collect();
        let mut touched = vec![false; layout.n_sites()];
        for group in groups {
            for (p, &s) in group.iter().enumerate() {
                if s >= map.len() || touched[s] {
                    return Err(LabError::InvalidPermutation(format!(
                        "site {s} listed twice or out of range"
                    )));
                }
                touched[s] = true;
                map[s] = group[(p + 1) % group.len()];
            }
        }
        SitePermutationUnitary::new(layout, map, global_phase)
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn site_map(&self) -> &[usize] {
        &self.site_map
    }

    pub fn global_phase(&self) -> C64 {
        self.global_phase
    }

    pub fn is_identity(&self) -> bool {
        self.site_map.iter().enumerate().all(|(s, &t)| s == t)
    }

    /// Sites moved by the permutation.
    pub fn support(&self) -> Vec<usize> {
        self.site_map
            .iter()
            .enumerate()
            .filter(|(s, t)| s != *t)
            .map(|(s, _)| s)
            .collect()
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &SitePermutationUnitary) -> Result<Self> {
        self.layout.ensure_same(&first.layout, "permutation composition")?;
        let map = first.site_map.iter().map(|&t| self.site_map[t]).collect();
        SitePermutationUnitary::new(
            self.layout.clone(),
            map,
            self.global_phase * first.global_phase,
        )
    }

    pub fn inverse(&self) -> Self {
        let mut map = vec![0; self.site_map.len()];
        for (s, &t) in self.site_map.iter().enumerate() {
            map[t] = s;
        }
        SitePermutationUnitary {
            layout: self.layout.clone(),
            site_map: map,
            global_phase: self.global_phase.conj(),
        }
    }

    /// Scatter targets: output linear index of every input linear index.
    fn for_each_image(&self, mut f: impl FnMut(usize, usize)) {
        let dims = self.layout.site_dims();
        let strides = self.layout.strides();
        let n = dims.len();
        let out_stride: Vec<usize> = (0..n).map(|s| strides[self.site_map[s]]).collect();
        let total = self.layout.total_dim() as usize;
        let mut digits = vec![0usize; n];
        let mut out = 0usize;
        for j in 0..total {
            f(j, out);
            // increment mixed-radix counter, keeping `out` in sync
            for s in (0..n).rev() {
                digits[s] += 1;
                out += out_stride[s];
                if digits[s] < dims[s] {
                    break;
                }
                out -= out_stride[s] * dims[s];
                digits[s] = 0;
            }
        }
    }

    pub fn apply_pure(&self, state: &PartitionedPureState) -> Result<PartitionedPureState> {
        self.layout.ensure_same(state.layout(), "permutation on pure state")?;
        let input = state.amplitudes();
        let mut out = vec![C64::new(0.0, 0.0); input.len()];
        let phase = self.global_phase;
        self.for_each_image(|j, i| out[i] = phase * input[j]);
        Ok(PartitionedPureState::from_parts_unchecked(
            self.layout.clone(),
            out,
        ))
    }

    /// Permutes probabilities; the phase is irrelevant for diagonal states.
    pub fn apply_diagonal(&self, state: &DiagonalState) -> Result<DiagonalState> {
        self.layout.ensure_same(state.layout(), "permutation on diagonal state")?;
        let input = state.probabilities();
        let mut out = vec![0.0; input.len()];
        self.for_each_image(|j, i| out[i] = input[j]);
        Ok(DiagonalState::from_parts_unchecked(self.layout.clone(), out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let l = SiteLayout::party_major(1, 3, 2).unwrap();
        let amps: Vec<C64> = (0..8).map(|i| c(i as f64)).collect();
        let s = PartitionedPureState::normalized(l.clone(), amps).unwrap();
        let u = SitePermutationUnitary::identity(l, c(1.0)).unwrap();
        assert_eq!(u.apply_pure(&s).unwrap(), s);
    }

    #[test]
    fn swap_relabels_basis_vector() {
        // |12> on two qutrits, swapped -> |21>
        let l = SiteLayout::party_major(1, 2, 3).unwrap();
        let s = PartitionedPureState::basis(l.clone(), 3 + 2).unwrap();
        let u = SitePermutationUnitary::new(l.clone(), vec![1, 0], c(1.0)).unwrap();
        let out = u.apply_pure(&s).unwrap();
        assert_eq!(out, PartitionedPureState::basis(l, 2 * 3 + 1).unwrap());
    }

    #[test]
    fn cyclic_right_moves_last_site_first() {
        // |001> -> |100> under right shift
        let l = SiteLayout::party_major(1, 3, 2).unwrap();
        let u = SitePermutationUnitary::cyclic_right(l.clone(), &[vec![0, 1, 2]], c(1.0)).unwrap();
        let out = u.apply_pure(&PartitionedPureState::basis(l.clone(), 0b001).unwrap()).unwrap();
        assert_eq!(out, PartitionedPureState::basis(l.clone(), 0b100).unwrap());
        let out = u.apply_pure(&PartitionedPureState::basis(l.clone(), 0b100).unwrap()).unwrap();
        assert_eq!(out, PartitionedPureState::basis(l, 0b010).unwrap());
    }

    #[test]
    fn rejects_unequal_dimensions_and_bad_phase() {
        let l = SiteLayout::new(vec![2, 3], vec![0, 0]).unwrap();
        assert!(SitePermutationUnitary::new(l.clone(), vec![1, 0], c(1.0)).is_err());
        assert!(SitePermutationUnitary::new(l.clone(), vec![0, 0], c(1.0)).is_err());
        assert!(SitePermutationUnitary::new(l, vec![0, 1], c(2.0)).is_err());
    }

    #[test]
    fn shift_power_is_identity() {
        let l = SiteLayout::party_major(1, 4, 2).unwrap();
        let u = SitePermutationUnitary::cyclic_right(l, &[vec![0, 1, 2, 3]], c(1.0)).unwrap();
        let mut acc = u.clone();
        for _ in 0..3 {
            assert!(!acc.is_identity());
            acc = u.after(&acc).unwrap();
        }
        assert!(acc.is_identity());
    }

    #[test]
    fn diagonal_permutation_ignores_phase() {
        let l = SiteLayout::party_major(1, 2, 2).unwrap();
        let d = DiagonalState::new(l.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let u = SitePermutationUnitary::new(l, vec![1, 0], C64::new(0.0, 1.0)).unwrap();
        assert_eq!(u.apply_diagonal(&d).unwrap().probabilities(), &[0.1, 0.3, 0.2, 0.4]);
    }
}
