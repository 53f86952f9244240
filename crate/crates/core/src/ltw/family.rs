//! Lazy finite levels of the universal family and protocol selection.
//!
//! Level `k` of an `N`-party family is the tensor product, over ordered
//! pairs `i ≠ j` of points of an `ε_{n_k}`-cover of `(C^{d_k})^{⊗N}`, of the
//! catalysts `Ω_{n_k}(Ψ_i, Ψ_j)`. Nothing at this scale is ever built: a
//! protocol touches a single pair factor, and every other factor is a
//! spectator on which the protocol acts as the identity.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::cover::{epsilon_cover_with, CoverConfig, CoverKind, CoverPolicy, EpsilonCover};
use super::counting::{counting_entry, family_counting, least_level, CountingEntry, FamilyCounting};
use crate::catalyst::{build_catalyst, catalyst_bound, normalization, phase_for_overlap, uniform_parties, ShiftSetup};
use crate::error::{LabError, Result};
use crate::report::{BoundKind, ErrorReport, Protocol};
use crate::tensor::random::derive_seed;
use crate::tensor::state::{inner, PartitionedPureState};
use crate::tensor::Palette;

/// Cover radius used at catalyst length `n`: `1/sqrt(n)`.
pub fn cover_radius(n: usize) -> f64 {
    1.0 / (n as f64).sqrt()
}

/// Composed bound `2/sqrt(n) + 2·ε_n = 4/sqrt(n)` used to select a level.
pub fn level_bound(n: usize) -> f64 {
    4.0 / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub n_parties: usize,
    pub seed: u64,
    /// Number of counting entries available to protocols.
    pub prefix: usize,
    pub policy: CoverPolicy,
    pub cover: CoverConfig,
}

impl FamilyConfig {
    pub fn new(n_parties: usize, seed: u64, prefix: usize) -> Self {
        FamilyConfig {
            n_parties,
            seed,
            prefix,
            policy: CoverPolicy::Auto,
            cover: CoverConfig::default(),
        }
    }
}

/// `D_k = base^exponent`, the per-party dimension of level `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelDimension {
    pub base: usize,
    /// `n_k · M(d_k, n_k)` (saturating).
    pub exponent: u128,
}

#[derive(Debug)]
pub struct LtwFamily {
    config: FamilyConfig,
    covers: Mutex<BTreeMap<usize, Arc<EpsilonCover>>>,
}

impl LtwFamily {
    pub fn new(config: FamilyConfig) -> Result<Self> {
        if config.n_parties < 1 || config.prefix < 1 {
            return Err(LabError::InvalidArgument(
                "a family needs at least one party and one level".into(),
            ));
        }
        Ok(LtwFamily {
            config,
            covers: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn config(&self) -> &FamilyConfig {
        &self.config
    }

    pub fn prefix(&self) -> usize {
        self.config.prefix
    }

    /// The same family with a different prefix length (covers are rebuilt
    /// lazily and coincide level by level).
    pub fn with_prefix(&self, prefix: usize) -> Result<Self> {
        LtwFamily::new(FamilyConfig { prefix, ..self.config })
    }

    pub fn counting(&self) -> Result<FamilyCounting> {
        family_counting(self.config.prefix)
    }

    pub fn entry(&self, k: usize) -> Result<CountingEntry> {
        if k == 0 || k > self.config.prefix {
            return Err(LabError::ProtocolLevel {
                level: k,
                available: self.config.prefix,
            });
        }
        counting_entry(k)
    }

    /// Cover of level `k`, built on first use from a seed derived from the
    /// family seed and `k` only.
    pub fn level_cover(&self, k: usize) -> Result<Arc<EpsilonCover>> {
        let e = self.entry(k)?;
        if let Some(c) = self.covers.lock().expect("cover cache poisoned").get(&k) {
            return Ok(c.clone());
        }
        let cover = Arc::new(epsilon_cover_with(
            e.d,
            self.config.n_parties,
            cover_radius(e.n),
            derive_seed(self.config.seed, k as u64),
            &self.config.cover,
            self.config.policy,
        )?);
        self.covers
            .lock()
            .expect("cover cache poisoned")
            .entry(k)
            .or_insert(cover.clone());
        Ok(cover)
    }

    pub fn level_dimension(&self, k: usize) -> Result<LevelDimension> {
        let e = self.entry(k)?;
        let cover = self.level_cover(k)?;
        Ok(LevelDimension {
            base: e.d,
            exponent: cover.pair_count().saturating_mul(e.n as u128),
        })
    }

    /// Least level in the prefix with local dimension `d` and `4/sqrt(n_k) < ε`.
    pub fn select_level(&self, d: usize, epsilon: f64) -> Result<usize> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(LabError::InvalidArgument("epsilon must be positive".into()));
        }
        let mut n_min = ((16.0 / (epsilon * epsilon)).floor() as usize).max(2);
        while level_bound(n_min) >= epsilon {
            n_min += 1;
        }
        let k = least_level(d, n_min, 1)?;
        if k > self.config.prefix {
            return Err(LabError::ExtendCountingPrefix {
                prefix: self.config.prefix,
                needed: k,
            });
        }
        Ok(k)
    }
}

/// Everything needed to replay a protocol against a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtwProtocol {
    pub level: usize,
    pub d: usize,
    pub n: usize,
    pub source_index: u128,
    pub target_index: u128,
    pub source_distance: f64,
    pub target_distance: f64,
    /// `ψ ≈ source_phase · Ψ_i`, `φ ≈ target_phase · Ψ_j`.
    pub source_phase: C64,
    pub target_phase: C64,
    /// Global phase of the shift (or of the identity when `i = j`).
    pub phase: C64,
    pub identity: bool,
    pub cover_fingerprint: String,
}

#[derive(Debug, Clone)]
pub struct LtwOutcome {
    pub report: ErrorReport,
    pub protocol: LtwProtocol,
}

/// Choose the least qualifying level, approximate `ψ` and `φ` by cover
/// points `Ψ_i`, `Ψ_j`, and shift the `(i, j)` pair factor.
pub fn ltw_embezzle(family: &LtwFamily, psi: &PartitionedPureState, phi: &PartitionedPureState, epsilon: f64) -> Result<LtwOutcome> {
    let (n_parties, d) = uniform_parties(psi.layout())?;
    psi.layout().ensure_same(phi.layout(), "transition endpoints")?;
    if n_parties != family.config.n_parties {
        return Err(LabError::LayoutMismatch(format!(
            "family has {} parties, states have {n_parties}",
            family.config.n_parties
        )));
    }
    let k = family.select_level(d, epsilon)?;
    let n = family.entry(k)?.n;
    let cover = family.level_cover(k)?;
    let src = cover.lookup(psi)?;
    let dst = cover.lookup(phi)?;
    let identity = src.index == dst.index;
    let align = src.phase.conj() * dst.phase;
    let phase = if identity {
        align
    } else {
        align * phase_for_overlap(src.point.inner(&dst.point)?).conj()
    };
    let protocol = LtwProtocol {
        level: k,
        d,
        n,
        source_index: src.index,
        target_index: dst.index,
        source_distance: src.distance,
        target_distance: dst.distance,
        source_phase: src.phase,
        target_phase: dst.phase,
        phase,
        identity,
        cover_fingerprint: cover.fingerprint(),
    };
    let exact = evaluate_protocol(family, &protocol, psi, phi)?;
    let description = if identity {
        "source and target share a cover point: phase only"
    } else {
        "cyclic right shift on the (source, target) pair factor"
    };
    let mut report_protocol = Protocol::cyclic(
        description,
        phase,
        if identity { Vec::new() } else { (0..n_parties).collect() },
        if identity { 1 } else { n + 1 },
    );
    report_protocol.level = Some(k);
    report_protocol.pair = Some((src.index, dst.index));
    Ok(LtwOutcome {
        report: ErrorReport {
            exact_error: exact,
            analytic_bound: catalyst_bound(n) + src.distance + dst.distance,
            bound: BoundKind::CoverComposed,
            protocol: report_protocol,
            reference_error: None,
        },
        protocol,
    })
}

fn cover_point(cover: &EpsilonCover, index: u128, target: &PartitionedPureState) -> Result<PartitionedPureState> {
    match cover.kind() {
        CoverKind::Greedy => cover
            .point(index as usize)
            .ok_or_else(|| LabError::Inconsistent(format!("cover has no point {index}"))),
        CoverKind::Lattice => {
            let hit = cover.lookup(target)?;
            if hit.index != index {
                return Err(LabError::Inconsistent(
                    "lattice point does not match the protocol".into(),
                ));
            }
            Ok(hit.point)
        }
    }
}

/// `‖U(ψ ⊗ Ω^{(k)}) − φ ⊗ Ω^{(k)}‖` for a recorded protocol. Spectator
/// factors contribute exactly nothing, so only the pair factor is built.
pub fn evaluate_protocol(
    family: &LtwFamily,
    protocol: &LtwProtocol,
    psi: &PartitionedPureState,
    phi: &PartitionedPureState,
) -> Result<f64> {
    let cover = family.level_cover(protocol.level)?;
    if cover.fingerprint() != protocol.cover_fingerprint {
        return Err(LabError::Inconsistent(format!(
            "level {} cover differs from the one the protocol was built on",
            protocol.level
        )));
    }
    if protocol.identity {
        return Ok(psi
            .amplitudes()
            .iter()
            .zip(phi.amplitudes())
            .map(|(a, b)| (a * protocol.phase - b).norm_sqr())
            .sum::<f64>()
            .sqrt());
    }
    let big_psi = cover_point(&cover, protocol.source_index, psi)?;
    let big_phi = cover_point(&cover, protocol.target_index, phi)?;
    let n_parties = cover.n_parties();
    let mut vectors: Vec<Vec<C64>> = Vec::new();
    let mut index_of = |v: &[C64]| -> usize {
        match vectors.iter().position(|w| w.as_slice() == v) {
            Some(i) => i,
            None => {
                vectors.push(v.to_vec());
                vectors.len() - 1
            }
        }
    };
    let (s, t) = (index_of(psi.amplitudes()), index_of(phi.amplitudes()));
    let (a, b) = (index_of(big_psi.amplitudes()), index_of(big_phi.amplitudes()));
    let palette = Arc::new(Palette::single_part(cover.d(), n_parties, vectors)?);
    let overlap = big_psi.inner(&big_phi)?;
    let lambda = phase_for_overlap(overlap);
    let c_n = normalization((lambda * overlap).re.max(0.0), protocol.n);
    let parties: Vec<usize> = (0..n_parties).collect();
    ShiftSetup {
        palette: &palette,
        source: &[s],
        target: &[t],
        a: &[a],
        b: &[b],
        lambda,
        c_n,
        n: protocol.n,
        shifted: &parties,
        phase: protocol.phase,
    }
    .error()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub level_prefix: usize,
    pub extended_prefix: usize,
    pub error_at_prefix: f64,
    pub error_at_extension: f64,
    pub discrepancy: f64,
    /// Levels whose covers were compared across the two prefixes.
    pub levels_compared: usize,
    pub fingerprints_match: bool,
    /// Pair factors whose unit norm was verified (the restriction of the
    /// extended product state to a level's sites is then that level's state).
    pub factors_checked: usize,
    pub max_factor_norm_deviation: f64,
}

/// Re-evaluate a protocol against the family extended to `extended_prefix`
/// and compare covers and factor norms on the first `marginal_levels` levels
/// (explicit covers with at most `max_pairs` ordered pairs only).
pub fn consistency_check(
    family: &LtwFamily,
    protocol: &LtwProtocol,
    psi: &PartitionedPureState,
    phi: &PartitionedPureState,
    extended_prefix: usize,
    marginal_levels: usize,
    max_pairs: u128,
) -> Result<ConsistencyReport> {
    if protocol.level > family.prefix() || protocol.level > extended_prefix {
        return Err(LabError::ProtocolLevel {
            level: protocol.level,
            available: family.prefix().min(extended_prefix),
        });
    }
    let extended = family.with_prefix(extended_prefix)?;
    let before = evaluate_protocol(family, protocol, psi, phi)?;
    let after = evaluate_protocol(&extended, protocol, psi, phi)?;

    let mut levels: Vec<usize> = (1..=marginal_levels.min(family.prefix())).collect();
    if !levels.contains(&protocol.level) {
        levels.push(protocol.level);
    }
    let mut fingerprints_match = true;
    let mut factors_checked = 0;
    let mut max_dev: f64 = 0.0;
    for &k in &levels {
        let a = family.level_cover(k)?;
        let b = extended.level_cover(k)?;
        fingerprints_match &= a.fingerprint() == b.fingerprint();
        if k == protocol.level || a.pair_count() > max_pairs {
            continue;
        }
        let Some(points) = a.points() else { continue };
        let n = family.entry(k)?.n;
        let layout = a.layout();
        for (i, p) in points.iter().enumerate() {
            for (j, q) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let pi = PartitionedPureState::from_parts_unchecked(layout.clone(), p.clone());
                let pj = PartitionedPureState::from_parts_unchecked(layout.clone(), q.clone());
                let rec = build_catalyst(&pi, &pj, n)?;
                max_dev = max_dev.max((rec.catalyst.norm() - 1.0).abs());
                factors_checked += 1;
            }
        }
    }
    Ok(ConsistencyReport {
        level_prefix: family.prefix(),
        extended_prefix,
        error_at_prefix: before,
        error_at_extension: after,
        discrepancy: (before - after).abs(),
        levels_compared: levels.len(),
        fingerprints_match,
        factors_checked,
        max_factor_norm_deviation: max_dev,
    })
}

/// Overlap `|⟨Ψ_i|Ψ_j⟩|` of two explicit cover points (for diagnostics).
pub fn point_overlap(cover: &EpsilonCover, i: usize, j: usize) -> Option<f64> {
    let pts = cover.points()?;
    Some(inner(pts.get(i)?, pts.get(j)?).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random::{haar_state, rng_from_seed};
    use crate::tensor::SiteLayout;

    fn family(prefix: usize) -> LtwFamily {
        LtwFamily::new(FamilyConfig::new(2, 17, prefix)).unwrap()
    }

    #[test]
    fn level_selection_and_prefix_error() {
        let f = family(10_000);
        let k = f.select_level(2, 0.5).unwrap();
        let e = f.entry(k).unwrap();
        assert_eq!((e.d, e.n), (2, 65));
        assert!(level_bound(e.n) < 0.5);
        let short = family(100);
        assert!(matches!(
            short.select_level(2, 0.5),
            Err(LabError::ExtendCountingPrefix { prefix: 100, needed }) if needed == k
        ));
    }

    #[test]
    fn dimension_of_first_level_matches_cover() {
        let f = family(3);
        let cover = f.level_cover(1).unwrap();
        let dim = f.level_dimension(1).unwrap();
        let m = cover.len();
        assert_eq!(dim, LevelDimension { base: 2, exponent: 2 * m * (m - 1) });
    }

    #[test]
    fn same_cover_point_gives_zero_error() {
        let f = family(10_000);
        let layout = SiteLayout::one_site_per_party(2, 2).unwrap();
        let e0 = PartitionedPureState::basis(layout, 0).unwrap();
        let out = ltw_embezzle(&f, &e0, &e0, 0.5).unwrap();
        assert!(out.protocol.identity);
        assert_eq!(out.report.exact_error, 0.0);
    }

    #[test]
    fn random_transitions_meet_the_target_accuracy() {
        let f = family(10_000);
        let layout = SiteLayout::one_site_per_party(2, 2).unwrap();
        let mut rng = rng_from_seed(3);
        for _ in 0..5 {
            let psi = haar_state(layout.clone(), &mut rng).unwrap();
            let phi = haar_state(layout.clone(), &mut rng).unwrap();
            let out = ltw_embezzle(&f, &psi, &phi, 0.5).unwrap();
            assert!(out.report.within_bound());
            assert!(out.report.exact_error < 0.5);
            assert!(out.report.analytic_bound <= level_bound(out.protocol.n) + 1e-12);
        }
    }

    #[test]
    fn extension_does_not_change_errors() {
        let f = family(10_000);
        let layout = SiteLayout::one_site_per_party(2, 2).unwrap();
        let mut rng = rng_from_seed(4);
        let psi = haar_state(layout.clone(), &mut rng).unwrap();
        let phi = haar_state(layout, &mut rng).unwrap();
        let out = ltw_embezzle(&f, &psi, &phi, 0.5).unwrap();
        let rep = consistency_check(&f, &out.protocol, &psi, &phi, 20_000, 1, 10_000).unwrap();
        assert_eq!(rep.discrepancy, 0.0);
        assert!(rep.fingerprints_match);
        assert!(rep.factors_checked > 0 && rep.max_factor_norm_deviation < 1e-12);
        assert!(consistency_check(&f, &out.protocol, &psi, &phi, 10, 1, 0).is_err());
    }
}
