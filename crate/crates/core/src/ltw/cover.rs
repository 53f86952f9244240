//! Projective ε-covers of the unit sphere of `(C^d)^{⊗N}`.
//!
//! Two constructions are provided. [`CoverKind::Greedy`] runs seeded
//! farthest-point selection over a Haar-random candidate pool and certifies
//! the radius with fresh probes; it yields small explicit covers but its size
//! grows like `ε^{-2(D-1)}`. [`CoverKind::Lattice`] is an implicit cover:
//! a vector is phase-fixed, rounded to the grid `δ·(Z + iZ)^D` with
//! `δ = ε/sqrt(2D)`, and renormalized, which lands within `ε` by
//! construction. Lattice lookups return that rounded point, not necessarily
//! the nearest lattice point.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::caps::checked_pow;
use crate::error::{LabError, Result};
use crate::tensor::random::{haar_vector, rng_from_seed};
use crate::tensor::state::{inner, PartitionedPureState};
use crate::tensor::SiteLayout;

pub const COVER_SCHEMA_VERSION: u32 = 1;

/// `min_μ ‖μx − y‖`, which equals `sqrt(2 − 2|⟨x|y⟩|)` for unit vectors;
/// evaluated componentwise so that nearby vectors keep full precision.
pub fn projective_distance(x: &[C64], y: &[C64]) -> f64 {
    let c = inner(x, y);
    let mu = if c.norm() > 0.0 { c / c.norm() } else { C64::new(1.0, 0.0) };
    x.iter().zip(y).map(|(a, b)| (mu * a - b).norm_sqr()).sum::<f64>().sqrt()
}

fn overlap_distance(x: &[C64], y: &[C64]) -> f64 {
    (2.0 - 2.0 * inner(x, y).norm()).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverKind {
    Greedy,
    Lattice,
}

/// Which construction [`epsilon_cover_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverPolicy {
    Greedy,
    Lattice,
    /// Greedy within `max_points`, otherwise lattice.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverConfig {
    /// Candidate pool size and certification probe count.
    pub probe_budget: usize,
    /// Greedy covers larger than this fail (or fall back under `Auto`).
    pub max_points: usize,
    /// The greedy build stops once every candidate is within
    /// `build_fraction · ε`.
    pub build_fraction: f64,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig {
            probe_budget: 10_000,
            max_points: 2_000,
            build_fraction: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub probes: usize,
    pub worst_distance: f64,
    /// True when the radius holds by construction rather than by sampling.
    pub guaranteed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Points {
    Greedy { points: Vec<Vec<C64>> },
    Lattice { step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonCover {
    d: usize,
    n_parties: usize,
    epsilon: f64,
    seed: u64,
    points: Points,
    certification: Certification,
}

#[derive(Debug, Clone)]
pub struct CoverLookup {
    /// Position in the point list, or the mixed-radix code of the lattice
    /// coordinates (a hash of them if the code overflows).
    pub index: u128,
    /// `target ≈ phase · point`.
    pub phase: C64,
    pub distance: f64,
    pub point: PartitionedPureState,
}

fn validate(d: usize, n_parties: usize, epsilon: f64) -> Result<usize> {
    if d < 2 || n_parties == 0 {
        return Err(LabError::InvalidArgument(format!(
            "cover needs d >= 2 and at least one party, got d={d}, N={n_parties}"
        )));
    }
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(LabError::InvalidArgument(format!(
            "cover radius must lie in (0, 2], got {epsilon}"
        )));
    }
    let dim = checked_pow(d, n_parties);
    if dim > 1 << 12 {
        return Err(LabError::DimensionOverCap {
            requested: dim,
            cap: 1 << 12,
            context: "cover vector dimension",
        });
    }
    Ok(dim as usize)
}

/// Greedy cover with the default configuration.
pub fn epsilon_cover(d: usize, n_parties: usize, epsilon: f64, seed: u64) -> Result<EpsilonCover> {
    epsilon_cover_with(d, n_parties, epsilon, seed, &CoverConfig::default(), CoverPolicy::Greedy)
}

pub fn epsilon_cover_with(
    d: usize,
    n_parties: usize,
    epsilon: f64,
    seed: u64,
    config: &CoverConfig,
    policy: CoverPolicy,
) -> Result<EpsilonCover> {
    match policy {
        CoverPolicy::Greedy => greedy_cover(d, n_parties, epsilon, seed, config),
        CoverPolicy::Lattice => lattice_cover(d, n_parties, epsilon, seed, config.probe_budget),
        CoverPolicy::Auto => match greedy_cover(d, n_parties, epsilon, seed, config) {
            Err(LabError::CoverNotCertified { .. }) => {
                lattice_cover(d, n_parties, epsilon, seed, config.probe_budget)
            }
            other => other,
        },
    }
}

fn greedy_cover(d: usize, n_parties: usize, epsilon: f64, seed: u64, config: &CoverConfig) -> Result<EpsilonCover> {
    let dim = validate(d, n_parties, epsilon)?;
    let mut rng = rng_from_seed(seed);
    let build_radius = config.build_fraction * epsilon;
    let mut e0 = vec![C64::new(0.0, 0.0); dim];
    e0[0] = C64::new(1.0, 0.0);
    let mut points = vec![e0];
    let mut pool: Vec<Vec<C64>> = (1..dim)
        .map(|i| {
            let mut e = vec![C64::new(0.0, 0.0); dim];
            e[i] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    pool.extend((0..config.probe_budget).map(|_| haar_vector(dim, &mut rng)));
    let mut nearest: Vec<f64> = pool.par_iter().map(|c| overlap_distance(&points[0], c)).collect();

    loop {
        // farthest-point selection until the pool is covered
        loop {
            let (far, &dist) = nearest
                .iter()
                .enumerate()
                .fold((0, &-1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if dist <= build_radius {
                break;
            }
            if points.len() >= config.max_points {
                return Err(LabError::CoverNotCertified {
                    achieved: dist,
                    requested: epsilon,
                });
            }
            let p = pool[far].clone();
            nearest
                .par_iter_mut()
                .zip(pool.par_iter())
                .for_each(|(n, c)| *n = n.min(overlap_distance(&p, c)));
            points.push(p);
        }
        let probes: Vec<Vec<C64>> = (0..config.probe_budget).map(|_| haar_vector(dim, &mut rng)).collect();
        let dists: Vec<f64> = probes
            .par_iter()
            .map(|x| points.iter().map(|p| overlap_distance(p, x)).fold(f64::INFINITY, f64::min))
            .collect();
        let worst = dists.iter().copied().fold(0.0, f64::max);
        if worst <= epsilon {
            return Ok(EpsilonCover {
                d,
                n_parties,
                epsilon,
                seed,
                points: Points::Greedy { points },
                certification: Certification {
                    probes: config.probe_budget,
                    worst_distance: worst,
                    guaranteed: false,
                },
            });
        }
        // uncovered probes join the pool and the build resumes
        for (x, dist) in probes.into_iter().zip(dists) {
            if dist > build_radius {
                pool.push(x);
                nearest.push(dist);
            }
        }
    }
}

/// Implicit lattice cover; `probes` random targets are checked and recorded.
pub fn lattice_cover(d: usize, n_parties: usize, epsilon: f64, seed: u64, probes: usize) -> Result<EpsilonCover> {
    let dim = validate(d, n_parties, epsilon)?;
    let step = epsilon / (2.0 * dim as f64).sqrt();
    let mut cover = EpsilonCover {
        d,
        n_parties,
        epsilon,
        seed,
        points: Points::Lattice { step },
        certification: Certification {
            probes: 0,
            worst_distance: 0.0,
            guaranteed: true,
        },
    };
    let mut rng = rng_from_seed(seed);
    let targets: Vec<Vec<C64>> = (0..probes).map(|_| haar_vector(dim, &mut rng)).collect();
    let worst = targets
        .par_iter()
        .map(|x| {
            let (_, p) = cover.round_to_lattice(x);
            projective_distance(&p, x)
        })
        .reduce(|| 0.0, f64::max);
    cover.certification.probes = probes;
    cover.certification.worst_distance = worst;
    Ok(cover)
}

impl EpsilonCover {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> CoverKind {
        match self.points {
            Points::Greedy { .. } => CoverKind::Greedy,
            Points::Lattice { .. } => CoverKind::Lattice,
        }
    }

    pub fn certification(&self) -> Certification {
        self.certification
    }

    pub fn layout(&self) -> SiteLayout {
        SiteLayout::one_site_per_party(self.n_parties, self.d).expect("validated at construction")
    }

    fn dim(&self) -> usize {
        checked_pow(self.d, self.n_parties) as usize
    }

    /// Explicit points, if the cover has them.
    pub fn points(&self) -> Option<&[Vec<C64>]> {
        match &self.points {
            Points::Greedy { points } => Some(points),
            Points::Lattice { .. } => None,
        }
    }

    /// Number of points; for lattice covers an upper bound (saturating).
    pub fn len(&self) -> u128 {
        match &self.points {
            Points::Greedy { points } => points.len() as u128,
            Points::Lattice { step } => {
                let radix = 2 * lattice_extent(*step) as usize + 1;
                checked_pow(radix, 2 * self.dim())
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ordered pairs of distinct points, `|points|·(|points|−1)` (saturating).
    pub fn pair_count(&self) -> u128 {
        let n = self.len();
        n.saturating_mul(n.saturating_sub(1))
    }

    pub fn point(&self, index: usize) -> Option<PartitionedPureState> {
        let p = self.points()?.get(index)?;
        Some(PartitionedPureState::from_parts_unchecked(self.layout(), p.clone()))
    }

    pub fn lookup(&self, target: &PartitionedPureState) -> Result<CoverLookup> {
        self.layout().ensure_same(target.layout(), "cover lookup")?;
        let x = target.amplitudes();
        let (index, point) = match &self.points {
            Points::Greedy { points } => {
                let mut best = (0usize, -1.0f64);
                for (i, p) in points.iter().enumerate() {
                    let ov = inner(p, x).norm();
                    if ov > best.1 {
                        best = (i, ov);
                    }
                }
                (best.0 as u128, points[best.0].clone())
            }
            Points::Lattice { .. } => self.round_to_lattice(x),
        };
        let ov = inner(&point, x);
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
        Ok(CoverLookup {
            index,
            phase,
            distance: projective_distance(&point, x),
            point: PartitionedPureState::from_parts_unchecked(self.layout(), point),
        })
    }

    fn round_to_lattice(&self, x: &[C64]) -> (u128, Vec<C64>) {
        let Points::Lattice { step } = self.points else {
            unreachable!("lattice rounding on an explicit cover")
        };
        let lead = x
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best })
            .0;
        let fix = if x[lead].norm() > 0.0 { x[lead].conj() / x[lead].norm() } else { C64::new(1.0, 0.0) };
        let coords: Vec<i64> = x
            .iter()
            .flat_map(|z| {
                let w = z * fix;
                [(w.re / step).round() as i64, (w.im / step).round() as i64]
            })
            .collect();
        let mut y: Vec<C64> = coords
            .chunks(2)
            .map(|c| C64::new(c[0] as f64 * step, c[1] as f64 * step))
            .collect();
        let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        y.iter_mut().for_each(|z| *z /= norm);
        (lattice_index(&coords, lattice_extent(step)), y)
    }

    /// SHA-256 over the cover's defining data, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.d as u64).to_le_bytes());
        h.update((self.n_parties as u64).to_le_bytes());
        h.update(self.epsilon.to_bits().to_le_bytes());
        h.update(self.seed.to_le_bytes());
        match &self.points {
            Points::Greedy { points } => {
                h.update(b"greedy");
                for z in points.iter().flatten() {
                    h.update(z.re.to_bits().to_le_bytes());
                    h.update(z.im.to_bits().to_le_bytes());
                }
            }
            Points::Lattice { step } => {
                h.update(b"lattice");
                h.update(step.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn to_document(&self) -> CoverDocument {
        let (points, step) = match &self.points {
            Points::Greedy { points } => (
                Some(points.iter().map(|p| p.iter().flat_map(|z| [z.re, z.im]).collect()).collect()),
                None,
            ),
            Points::Lattice { step } => (None, Some(*step)),
        };
        CoverDocument {
            schema_version: COVER_SCHEMA_VERSION,
            d: self.d,
            n_parties: self.n_parties,
            epsilon: self.epsilon,
            seed: self.seed,
            kind: self.kind(),
            points,
            lattice_step: step,
            certification: self.certification,
        }
    }

    pub fn from_document(doc: &CoverDocument) -> Result<Self> {
        if doc.schema_version != COVER_SCHEMA_VERSION {
            return Err(LabError::InvalidArgument(format!(
                "unsupported cover schema version {}",
                doc.schema_version
            )));
        }
        let dim = validate(doc.d, doc.n_parties, doc.epsilon)?;
        let points = match (doc.kind, &doc.points, doc.lattice_step) {
            (CoverKind::Greedy, Some(raw), _) => {
                let mut pts = Vec::with_capacity(raw.len());
                for flat in raw {
                    if flat.len() != 2 * dim {
                        return Err(LabError::LayoutMismatch(format!(
                            "cover point has {} reals, expected {}",
                            flat.len(),
                            2 * dim
                        )));
                    }
                    pts.push(flat.chunks(2).map(|c| C64::new(c[0], c[1])).collect());
                }
                Points::Greedy { points: pts }
            }
            (CoverKind::Lattice, _, Some(step)) => Points::Lattice { step },
            _ => return Err(LabError::InvalidArgument("cover document is incomplete".into())),
        };
        Ok(EpsilonCover {
            d: doc.d,
            n_parties: doc.n_parties,
            epsilon: doc.epsilon,
            seed: doc.seed,
            points,
            certification: doc.certification,
        })
    }
}

/// Serialized form of a cover. Greedy points are stored as interleaved
/// `[re, im, re, im, …]` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverDocument {
    pub schema_version: u32,
    pub d: usize,
    pub n_parties: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub kind: CoverKind,
    pub points: Option<Vec<Vec<f64>>>,
    pub lattice_step: Option<f64>,
    pub certification: Certification,
}

fn lattice_extent(step: f64) -> i64 {
    (1.0 / step).ceil() as i64 + 1
}

fn lattice_index(coords: &[i64], extent: i64) -> u128 {
    let radix = (2 * extent + 1) as u128;
    let mut code: Option<u128> = Some(0);
    for &c in coords {
        code = code
            .and_then(|v| v.checked_mul(radix))
            .and_then(|v| v.checked_add((c + extent) as u128));
    }
    code.unwrap_or_else(|| {
        let mut h = Sha256::new();
        for c in coords {
            h.update(c.to_le_bytes());
        }
        let digest = h.finalize();
        u128::from_le_bytes(digest[..16].try_into().expect("16 bytes"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random::haar_state;

    fn bloch(theta: f64, phi: f64) -> Vec<C64> {
        vec![
            C64::new((theta / 2.0).cos(), 0.0),
            C64::from_polar((theta / 2.0).sin(), phi),
        ]
    }

    #[test]
    fn radius_two_needs_one_point() {
        let cover = epsilon_cover(2, 2, 2.0, 1).unwrap();
        assert_eq!(cover.len(), 1);
        assert_eq!(cover.pair_count(), 0);
    }

    #[test]
    fn bloch_cover_passes_grid_oracle() {
        let cover = epsilon_cover(2, 1, 0.5, 3).unwrap();
        let pts = cover.points().unwrap();
        for p in pts {
            assert!((p.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let mut worst: f64 = 0.0;
        for a in 0..=180 {
            for b in 0..360 {
                let x = bloch(a as f64 * std::f64::consts::PI / 180.0, b as f64 * std::f64::consts::PI / 180.0);
                let best = pts.iter().map(|p| projective_distance(p, &x)).fold(f64::INFINITY, f64::min);
                worst = worst.max(best);
            }
        }
        assert!(worst <= 0.5, "grid worst distance {worst}");
        assert!(cover.certification().worst_distance <= 0.5);
    }

    #[test]
    fn lookup_of_cover_point_and_its_phase() {
        let cover = epsilon_cover(2, 1, 0.6, 5).unwrap();
        let p = cover.point(3).unwrap();
        let hit = cover.lookup(&p).unwrap();
        assert_eq!(hit.index, 3);
        assert!(hit.distance == 0.0 && (hit.phase - C64::new(1.0, 0.0)).norm() < 1e-12);
        let mu = C64::from_polar(1.0, 0.7);
        let hit = cover.lookup(&p.with_phase(mu)).unwrap();
        assert_eq!(hit.index, 3);
        assert!(hit.distance < 1e-15 && (hit.phase - mu).norm() < 1e-12);
    }

    #[test]
    fn random_lookups_are_within_radius() {
        let mut rng = rng_from_seed(9);
        for (cover, n) in [
            (epsilon_cover(2, 2, 0.8, 2).unwrap(), 1000),
            (lattice_cover(2, 2, 0.05, 2, 100).unwrap(), 1000),
            (lattice_cover(3, 2, 0.02, 2, 100).unwrap(), 200),
        ] {
            for _ in 0..n {
                let x = haar_state(cover.layout(), &mut rng).unwrap();
                let hit = cover.lookup(&x).unwrap();
                assert!(hit.distance <= cover.epsilon());
                let brute = projective_distance(hit.point.amplitudes(), x.amplitudes());
                assert_eq!(brute, hit.distance);
                let aligned: f64 = hit
                    .point
                    .amplitudes()
                    .iter()
                    .zip(x.amplitudes())
                    .map(|(p, t)| (p * hit.phase - t).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!((aligned - hit.distance).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lattice_maps_basis_vectors_to_themselves() {
        let cover = lattice_cover(2, 2, 0.03, 0, 10).unwrap();
        let e2 = PartitionedPureState::basis(cover.layout(), 2).unwrap();
        let hit = cover.lookup(&e2).unwrap();
        assert_eq!(hit.distance, 0.0);
        assert_eq!(hit.point.amplitudes(), e2.amplitudes());
    }

    #[test]
    fn greedy_is_seed_deterministic() {
        let a = epsilon_cover(2, 1, 0.7, 42).unwrap();
        let b = epsilon_cover(2, 1, 0.7, 42).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = epsilon_cover(2, 1, 0.7, 43).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn budget_exhaustion_names_achieved_radius() {
        let cfg = CoverConfig {
            max_points: 5,
            ..CoverConfig::default()
        };
        match epsilon_cover_with(2, 2, 0.3, 1, &cfg, CoverPolicy::Greedy) {
            Err(LabError::CoverNotCertified { achieved, requested }) => {
                assert!(achieved > 0.3 * 0.9 && requested == 0.3)
            }
            other => panic!("unexpected {other:?}"),
        }
        let auto = epsilon_cover_with(2, 2, 0.3, 1, &cfg, CoverPolicy::Auto).unwrap();
        assert_eq!(auto.kind(), CoverKind::Lattice);
    }

    #[test]
    fn document_round_trip() {
        for cover in [epsilon_cover(2, 1, 0.9, 4).unwrap(), lattice_cover(2, 1, 0.1, 4, 10).unwrap()] {
            let json = serde_json::to_string(&cover.to_document()).unwrap();
            let doc: CoverDocument = serde_json::from_str(&json).unwrap();
            let back = EpsilonCover::from_document(&doc).unwrap();
            assert_eq!(back, cover);
            assert_eq!(back.fingerprint(), cover.fingerprint());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(epsilon_cover(1, 2, 0.5, 0).is_err());
        assert!(epsilon_cover(2, 2, 0.0, 0).is_err());
        assert!(epsilon_cover(2, 2, 2.5, 0).is_err());
    }
}
