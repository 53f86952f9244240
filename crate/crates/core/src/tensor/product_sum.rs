//! Superpositions of product states over a party-major qudit layout.
//!
//! A [`ProductSumState`] lives on `n_parties` parties that each own
//! `positions` qudits of dimension `site_dim`. The parties are split into
//! *parts*; at every position each part holds one vector drawn from that
//! part's palette, so a term is a product over (part, position) slots:
//!
//! ```text
//!   position:      0        1        2      ...
//!   part 0:      ψ_a      ψ_b      ψ_b
//!   part 1:      ξ        ξ        ξ
//! ```
//!
//! Per-part sequences are run-length encoded, so inner products between
//! terms cost `O(runs)` instead of `O(positions)`, and permutations that map
//! slots onto slots act on the encoding directly. This is what makes
//! catalysts over `d^{nN}`-dimensional spaces tractable.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::layout::{digits_of, SiteLayout};
use super::permutation::SitePermutationUnitary;
use super::state::{inner, l2_norm, PartitionedPureState};
use crate::caps::{checked_pow, Caps};
use crate::error::{LabError, Result};

/// Vectors available to each part, with their Gram matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    site_dim: usize,
    n_parties: usize,
    parts: Vec<Vec<usize>>,
    vectors: Vec<Vec<Vec<C64>>>,
    gram: Vec<Vec<Vec<C64>>>,
}

impl Palette {
    /// `parts` must partition `0..n_parties`; `vectors[g]` are the (not
    /// necessarily normalized) vectors of part `g`, each of length
    /// `site_dim^{|parts[g]|}`.
    pub fn new(site_dim: usize, parts: Vec<Vec<usize>>, vectors: Vec<Vec<Vec<C64>>>) -> Result<Self> {
        if parts.len() != vectors.len() {
            return Err(LabError::InvalidArgument(
                "one vector list per part is required".into(),
            ));
        }
        let n_parties = parts.iter().map(|p| p.len()).sum::<usize>();
        let mut seen = vec![false; n_parties];
        for part in &parts {
            if part.is_empty() {
                return Err(LabError::InvalidArgument("empty part".into()));
            }
            for &x in part {
                if x >= n_parties || seen[x] {
                    return Err(LabError::InvalidArgument(format!(
                        "parts do not partition the parties (party {x})"
                    )));
                }
                seen[x] = true;
            }
        }
        for (g, part) in parts.iter().enumerate() {
            let dim = checked_pow(site_dim, part.len());
            if vectors[g].is_empty() {
                return Err(LabError::InvalidArgument(format!("part {g} has no vectors")));
            }
            if let Some(v) = vectors[g].iter().find(|v| v.len() as u128 != dim) {
                return Err(LabError::LayoutMismatch(format!(
                    "part {g} expects vectors of length {dim}, got {}",
                    v.len()
                )));
            }
        }
        let gram = vectors
            .iter()
            .map(|vs| {
                vs.iter()
                    .map(|a| vs.iter().map(|b| inner(a, b)).collect())
                    .collect()
            })
            .collect();
        Ok(Palette {
            site_dim,
            n_parties,
            parts,
            vectors,
            gram,
        })
    }

    /// Single part holding all parties.
    pub fn single_part(site_dim: usize, n_parties: usize, vectors: Vec<Vec<C64>>) -> Result<Self> {
        Palette::new(site_dim, vec![(0..n_parties).collect()], vec![vectors])
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn vector(&self, part: usize, index: usize) -> &[C64] {
        &self.vectors[part][index]
    }

    pub fn gram(&self, part: usize, a: usize, b: usize) -> C64 {
        self.gram[part][a][b]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Run {
    vector: u32,
    len: u32,
}

type Runs = Vec<Vec<Run>>;

#[derive(Debug, Clone, PartialEq)]
struct Term {
    coeff: C64,
    runs: Runs,
}

/// Linear combination of palette product states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSumState {
    palette: Arc<Palette>,
    positions: usize,
    terms: Vec<Term>,
}

impl ProductSumState {
    pub fn zero(palette: Arc<Palette>, positions: usize) -> Self {
        ProductSumState {
            palette,
            positions,
            terms: Vec::new(),
        }
    }

    pub fn palette(&self) -> &Arc<Palette> {
        &self.palette
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Party-major layout with `positions` sites per party.
    pub fn layout(&self) -> Result<SiteLayout> {
        SiteLayout::party_major(self.palette.n_parties, self.positions, self.palette.site_dim)
    }

    /// Ambient dimension `site_dim^{positions * n_parties}` (saturating).
    pub fn total_dim(&self) -> u128 {
        checked_pow(self.palette.site_dim, self.positions * self.palette.n_parties)
    }

    /// Add `coeff × ⊗_{part, position} palette[part][sequence[part][position]]`.
    pub fn push_term(&mut self, coeff: C64, sequence: &[Vec<usize>]) -> Result<()> {
        if sequence.len() != self.palette.parts.len() {
            return Err(LabError::InvalidArgument(format!(
                "term has {} part sequences, palette has {} parts",
                sequence.len(),
                self.palette.parts.len()
            )));
        }
        let mut runs = Vec::with_capacity(sequence.len());
        for (g, seq) in sequence.iter().enumerate() {
            if seq.len() != self.positions {
                return Err(LabError::InvalidArgument(format!(
                    "part {g} sequence has {} positions, expected {}",
                    seq.len(),
                    self.positions
                )));
            }
            if let Some(&v) = seq.iter().find(|&&v| v >= self.palette.vectors[g].len()) {
                return Err(LabError::InvalidArgument(format!(
                    "palette index {v} out of range for part {g}"
                )));
            }
            runs.push(encode(seq));
        }
        self.terms.push(Term { coeff, runs });
        Ok(())
    }

    /// Add a term given as per-part runs `(palette index, length)`.
    pub fn push_runs(&mut self, coeff: C64, runs: &[Vec<(usize, usize)>]) -> Result<()> {
        let seq: Vec<Vec<usize>> = runs
            .iter()
            .map(|r| r.iter().flat_map(|&(v, n)| std::iter::repeat_n(v, n)).collect())
            .collect();
        self.push_term(coeff, &seq)
    }

    fn check_compatible(&self, other: &ProductSumState) -> Result<()> {
        if self.positions != other.positions
            || !(Arc::ptr_eq(&self.palette, &other.palette) || self.palette == other.palette)
        {
            return Err(LabError::LayoutMismatch(
                "product sums over different palettes or position counts".into(),
            ));
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &ProductSumState) -> Result<C64> {
        self.check_compatible(other)?;
        let mut acc = C64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                acc += a.coeff.conj() * b.coeff * self.term_overlap(&a.runs, &b.runs);
            }
        }
        Ok(acc)
    }

    fn term_overlap(&self, a: &Runs, b: &Runs) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (g, (ra, rb)) in a.iter().zip(b).enumerate() {
            acc *= runs_overlap(&self.palette.gram[g], ra, rb);
            if acc == C64::new(0.0, 0.0) {
                break;
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        // self-inner is real up to round-off
        self.inner(self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn scaled(&self, factor: C64) -> ProductSumState {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= factor;
        }
        out
    }

    /// `self − other`, terms concatenated (call [`merged`](Self::merged) to cancel).
    pub fn sub(&self, other: &ProductSumState) -> Result<ProductSumState> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().map(|t| Term {
            coeff: -t.coeff,
            runs: t.runs.clone(),
        }));
        Ok(out)
    }

    /// Combine terms with identical slot contents; order of first occurrence
    /// is kept so results are deterministic.
    pub fn merged(&self) -> ProductSumState {
        let mut index: HashMap<&Runs, usize> = HashMap::new();
        let mut terms: Vec<Term> = Vec::new();
        for t in &self.terms {
            match index.get(&t.runs) {
                Some(&k) => terms[k].coeff += t.coeff,
                None => {
                    index.insert(&t.runs, terms.len());
                    terms.push(t.clone());
                }
            }
        }
        terms.retain(|t| t.coeff != C64::new(0.0, 0.0));
        ProductSumState {
            palette: self.palette.clone(),
            positions: self.positions,
            terms,
        }
    }

    /// Apply a site permutation that maps every (part, position) slot onto
    /// another slot of the same part.
    pub fn apply_permutation(&self, u: &SitePermutationUnitary) -> Result<ProductSumState> {
        let layout = self.layout()?;
        layout.ensure_same(u.layout(), "permutation on product sum")?;
        let slot_map = self.slot_map(u)?;
        let phase = u.global_phase();
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let runs = t
                    .runs
                    .iter()
                    .zip(&slot_map)
                    .map(|(r, map)| {
                        let seq = decode(r, self.positions);
                        let mut out = vec![0usize; self.positions];
                        for (p, &v) in seq.iter().enumerate() {
                            out[map[p]] = v;
                        }
                        encode(&out)
                    })
                    .collect();
                Term {
                    coeff: t.coeff * phase,
                    runs,
                }
            })
            .collect();
        Ok(ProductSumState {
            palette: self.palette.clone(),
            positions: self.positions,
            terms,
        })
    }

    /// Per part: position `p` is carried to position `map[p]`.
    fn slot_map(&self, u: &SitePermutationUnitary) -> Result<Vec<Vec<usize>>> {
        let pos = self.positions;
        let site_map = u.site_map();
        self.palette
            .parts
            .iter()
            .map(|part| {
                (0..pos)
                    .map(|p| {
                        let target = site_map[part[0] * pos + p];
                        let (x0, q) = (target / pos, target % pos);
                        let ok = x0 == part[0]
                            && part.iter().all(|&x| site_map[x * pos + p] == x * pos + q);
                        if ok {
                            Ok(q)
                        } else {
                            Err(LabError::InvalidPermutation(
                                "permutation does not map product slots onto slots of the same part"
                                    .into(),
                            ))
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Dense amplitudes over [`layout`](Self::layout). Not normalized.
    pub fn to_dense_vector(&self, caps: &Caps) -> Result<Vec<C64>> {
        let dim = caps.check_state(self.total_dim(), "product-sum densification")?;
        let layout = self.layout()?;
        let dims = layout.site_dims().to_vec();
        let pos = self.positions;
        let d = self.palette.site_dim;
        let seqs: Vec<Vec<Vec<usize>>> = self
            .terms
            .iter()
            .map(|t| t.runs.iter().map(|r| decode(r, pos)).collect())
            .collect();
        let mut digits = vec![0usize; dims.len()];
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (i, amp) in out.iter_mut().enumerate() {
            digits_of(i, &dims, &mut digits);
            let mut acc = C64::new(0.0, 0.0);
            for (t, seq) in self.terms.iter().zip(&seqs) {
                let mut prod = t.coeff;
                'slots: for (g, part) in self.palette.parts.iter().enumerate() {
                    for p in 0..pos {
                        let sub = part.iter().fold(0usize, |acc, &x| acc * d + digits[x * pos + p]);
                        prod *= self.palette.vectors[g][seq[g][p]][sub];
                        if prod == C64::new(0.0, 0.0) {
                            break 'slots;
                        }
                    }
                }
                acc += prod;
            }
            *amp = acc;
        }
        Ok(out)
    }

    /// Dense unit vector; fails if the sum is not normalized.
    pub fn to_dense(&self, caps: &Caps) -> Result<PartitionedPureState> {
        PartitionedPureState::new(self.layout()?, self.to_dense_vector(caps)?)
    }
}

/// Euclidean norm of a dense vector (exposed for cross-checks).
pub fn dense_norm(v: &[C64]) -> f64 {
    l2_norm(v)
}

fn encode(seq: &[usize]) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for &v in seq {
        match runs.last_mut() {
            Some(r) if r.vector as usize == v => r.len += 1,
            _ => runs.push(Run {
                vector: v as u32,
                len: 1,
            }),
        }
    }
    runs
}

fn decode(runs: &[Run], positions: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(positions);
    for r in runs {
        out.extend(std::iter::repeat_n(r.vector as usize, r.len as usize));
    }
    out
}

fn runs_overlap(gram: &[Vec<C64>], a: &[Run], b: &[Run]) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    let (mut i, mut j) = (0, 0);
    let (mut left_a, mut left_b) = (a.first().map_or(0, |r| r.len), b.first().map_or(0, |r| r.len));
    while i < a.len() && j < b.len() {
        let step = left_a.min(left_b);
        let g = gram[a[i].vector as usize][b[j].vector as usize];
        if g != C64::new(1.0, 0.0) {
            acc *= g.powi(step as i32);
        }
        left_a -= step;
        left_b -= step;
        if left_a == 0 {
            i += 1;
            left_a = a.get(i).map_or(0, |r| r.len);
        }
        if left_b == 0 {
            j += 1;
            left_b = b.get(j).map_or(0, |r| r.len);
        }
    }
    acc
}
