//! The acceptance suite: twelve criteria, each with its own seed, run in
//! parallel on a bounded worker pool.

use std::time::{Duration, Instant};

use embezzle_core::caps::Caps;
use embezzle_core::catalyst::{build_catalyst, catalyst_bound, closed_form_error, embezzle_error, local_subset_error};
use embezzle_core::diagonal::catalyst::{point_to_uniform_error, shift_bound, site};
use embezzle_core::diagonal::{approx_catalyst_error, contraction_trial, ltw_spectrum_bruteforce, ltw_spectrum_closed_form, ratio_probe};
use embezzle_core::ltw::counting::counting_index;
use embezzle_core::ltw::{consistency_check, ltw_embezzle, FamilyConfig, LtwFamily};
use embezzle_core::report::BOUND_TOL;
use embezzle_core::tensor::random::{derive_seed, haar_state, random_diagonal, rng_from_seed};
use embezzle_core::tensor::{DiagonalState, PartitionedPureState, SiteLayout};
use embezzle_core::vdh::{
    alternating_distance, brute_force_bipartite_fidelity, optimal_bipartite_fidelity, trace_convergence,
    trace_nonembezzlement_witness,
};
use embezzle_core::Result;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{optimal_instance, sandwich_grid};
use crate::report::{Check, Report, Table};

pub const CRITERIA: [&str; 12] = [
    "catalyst bound",
    "normalization sandwich",
    "local-subset equality",
    "spectrum oracle",
    "simplified catalyst error",
    "ratio convergence",
    "vdh convergence",
    "optimal-error oracle",
    "non-embezzlement witness",
    "polar-lift bound",
    "consistency",
    "determinism",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub workers: usize,
    /// Criterion whose tolerances are replaced by negative values (negative
    /// control).
    pub corrupt: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 2024,
            workers: 8,
            corrupt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub runtime: Duration,
}

struct Ctx {
    id: usize,
    seed: u64,
    corrupt: bool,
    checks: Vec<Check>,
}

impl Ctx {
    fn tol(&self, t: f64) -> f64 {
        if self.corrupt {
            -1.0
        } else {
            t
        }
    }

    /// Records `lhs <= rhs + tol`.
    fn le(&mut self, name: &str, inequality: &str, lhs: f64, rhs: f64, tol: f64, inputs: String) {
        let rhs = rhs + self.tol(tol);
        self.checks.push(Check::le(name, inequality, lhs, rhs, inputs));
    }

    fn seed(&self, parts: &[u64]) -> u64 {
        parts.iter().fold(derive_seed(self.seed, self.id as u64), |s, &p| derive_seed(s, p))
    }
}

fn basis(layout: &SiteLayout, index: usize) -> Result<PartitionedPureState> {
    PartitionedPureState::basis(layout.clone(), index)
}

fn catalyst_grid() -> Vec<(usize, usize, usize)> {
    let mut grid = Vec::new();
    for d in [2, 3] {
        for n_parties in [2, 3] {
            for n in [2, 4, 8, 16, 32] {
                grid.push((d, n_parties, n));
            }
        }
    }
    grid
}

fn c1(ctx: &mut Ctx) -> Result<String> {
    type GridRow = (usize, usize, usize, f64, f64);
    let results: Vec<Result<GridRow>> = catalyst_grid()
        .into_par_iter()
        .map(|(d, np, n)| {
            let layout = SiteLayout::one_site_per_party(np, d)?;
            let mut worst: f64 = 0.0;
            for pair in 0..50u64 {
                let mut rng = rng_from_seed(ctx.seed(&[d as u64, np as u64, n as u64, pair]));
                let psi = haar_state(layout.clone(), &mut rng)?;
                let phi = haar_state(layout.clone(), &mut rng)?;
                worst = worst.max(embezzle_error(&psi, &phi, n)?.exact_error);
            }
            let last = layout.total_dim() as usize - 1;
            let orth = embezzle_error(&basis(&layout, 0)?, &basis(&layout, last)?, n)?.exact_error;
            Ok((d, np, n, worst, orth))
        })
        .collect();
    let mut violations = 0;
    for r in results {
        let (d, np, n, worst, orth) = r?;
        let inputs = format!("d={d} N={np} n={n}");
        let bound = catalyst_bound(n);
        violations += usize::from(worst > bound);
        ctx.le("random pairs", "max exact_error <= 2/sqrt(n+1)", worst, bound, BOUND_TOL, inputs.clone());
        let expected = 2f64.sqrt() / ((n + 1) as f64).sqrt();
        ctx.le("orthogonal pair", "|exact_error - sqrt(2)/sqrt(n+1)| <= 1e-12", (orth - expected).abs(), 0.0, 1e-12, inputs);
    }
    Ok(format!("1000 random pairs, {violations} violations"))
}

fn c2(ctx: &mut Ctx) -> Result<String> {
    let mut count = 0;
    for (d, np, n) in catalyst_grid() {
        let layout = SiteLayout::one_site_per_party(np, d)?;
        let (lo, hi) = (((n + 1) as f64).sqrt(), (n + 1) as f64);
        let mut worst_low: f64 = f64::INFINITY;
        let mut worst_high: f64 = 0.0;
        for pair in 0..50u64 {
            let mut rng = rng_from_seed(ctx.seed(&[d as u64, np as u64, n as u64, pair]));
            let psi = haar_state(layout.clone(), &mut rng)?;
            let phi = haar_state(layout.clone(), &mut rng)?;
            let c = build_catalyst(&psi, &phi, n)?.c_n;
            worst_low = worst_low.min(c);
            worst_high = worst_high.max(c);
            count += 1;
        }
        let inputs = format!("d={d} N={np} n={n}");
        ctx.le("lower", "sqrt(n+1) <= C_n", lo, worst_low, 1e-12, inputs.clone());
        ctx.le("upper", "C_n <= n+1", worst_high, hi, 1e-12, inputs.clone());
        let last = layout.total_dim() as usize - 1;
        let orth = build_catalyst(&basis(&layout, 0)?, &basis(&layout, last)?, n)?.c_n;
        let mut rng = rng_from_seed(ctx.seed(&[d as u64, np as u64, n as u64, u64::MAX]));
        let psi = haar_state(layout.clone(), &mut rng)?;
        let equal = build_catalyst(&psi, &psi, n)?.c_n;
        ctx.le("orthogonal equality", "|C_n - sqrt(n+1)| <= 1e-12", (orth - lo).abs(), 0.0, 1e-12, inputs.clone());
        ctx.le("equal equality", "|C_n - (n+1)| <= 1e-12", (equal - hi).abs(), 0.0, 1e-12, inputs);
    }
    Ok(format!("{count} catalysts plus equality cases"))
}

fn c3(ctx: &mut Ctx) -> Result<String> {
    let local = SiteLayout::one_site_per_party(2, 2)?;
    let spectator = SiteLayout::one_site_per_party(1, 2)?;
    let mut worst: f64 = 0.0;
    for n in [2, 4, 8] {
        for s in 0..20u64 {
            let mut rng = rng_from_seed(ctx.seed(&[n as u64, s]));
            let psi = haar_state(local.clone(), &mut rng)?;
            let phi = haar_state(local.clone(), &mut rng)?;
            let xi = haar_state(spectator.clone(), &mut rng)?;
            worst = worst.max(local_subset_error(&psi, &phi, &xi, n)?.discrepancy());
        }
    }
    ctx.le("local subset", "max |error_N - error_L| <= 1e-12", worst, 0.0, 1e-12, "d=2 N=3 L=2 n=2,4,8 seeds=20".into());
    Ok(format!("max discrepancy {worst:e}"))
}

fn c4(ctx: &mut Ctx) -> Result<String> {
    let mut worst: f64 = 0.0;
    for d in [2usize, 3] {
        for n in 2..=6usize {
            let a = ltw_spectrum_closed_form(n, d)?;
            let b = ltw_spectrum_bruteforce(n, d)?;
            let gap = if a.rows.len() == b.rows.len() && a.rows.iter().zip(&b.rows).all(|(x, y)| x.multiplicity == y.multiplicity) {
                a.rows.iter().zip(&b.rows).map(|(x, y)| (x.lambda - y.lambda).abs()).fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            worst = worst.max(gap);
            let inputs = format!("n={n} d={d}");
            ctx.le("entrywise", "max |closed - brute| <= 1e-12", gap, 0.0, 1e-12, inputs.clone());
            ctx.le("weight", "|sum m_j lambda_j - 1| <= 1e-12", (a.total_weight() - 1.0).abs(), 0.0, 1e-12, inputs.clone());
            let count = a.total_multiplicity() as f64 - (d as f64).powi(n as i32);
            ctx.le("count", "|sum m_j - d^n| = 0", count.abs(), 0.0, 0.0, inputs);
        }
    }
    Ok(format!("10 spectra, max gap {worst:e}"))
}

fn c5(ctx: &mut Ctx) -> Result<String> {
    let caps = Caps::default();
    let mut grid = Vec::new();
    for d in [2usize, 3] {
        for n in 2..=10usize {
            grid.push((d, n));
        }
    }
    let results: Vec<Result<(usize, usize, f64, f64)>> = grid
        .into_par_iter()
        .map(|(d, n)| {
            let point = DiagonalState::point_mass(site(d)?, 0)?;
            let uniform = DiagonalState::uniform(site(d)?);
            let closed = (approx_catalyst_error(&point, &uniform, n, &caps)?.exact_error - point_to_uniform_error(d, n)).abs();
            let mut worst: f64 = 0.0;
            for pair in 0..100u64 {
                let mut rng = rng_from_seed(ctx.seed(&[d as u64, n as u64, pair]));
                let a = random_diagonal(site(d)?, &mut rng)?;
                let b = random_diagonal(site(d)?, &mut rng)?;
                worst = worst.max(approx_catalyst_error(&a, &b, n, &caps)?.exact_error);
            }
            Ok((d, n, closed, worst))
        })
        .collect();
    for r in results {
        let (d, n, closed, worst) = r?;
        let inputs = format!("d={d} n={n}");
        ctx.le("point to uniform", "|exact - 2(1-d^(1-n))/(n-1)| <= 1e-12", closed, 0.0, 1e-12, inputs.clone());
        ctx.le("random pairs", "max exact_error <= 2/(n-1)", worst, shift_bound(n), BOUND_TOL, inputs);
    }
    Ok("18 grid points, 100 random pairs each".into())
}

fn c6(ctx: &mut Ctx) -> Result<String> {
    let a = ratio_probe(2, 3, 50)?;
    let b = ratio_probe(3, 5, 30)?;
    let at = |rows: &[embezzle_core::diagonal::RatioRow], n: usize| rows.iter().find(|r| r.n == n).copied().expect("row present");
    let r20 = at(&a.rows, 20).ratio;
    ctx.le("(2,3) at n=20", "|ratio_20 - 1/2| < 1e-5", (r20 - 0.5).abs(), 0.0, 1e-5, "d1=2 d2=3".into());
    ctx.le("equal limits", "|limit(2,3) - limit(3,5)| = 0", (a.limit - b.limit).abs(), 0.0, 0.0, "d1,d2=(2,3),(3,5)".into());
    let gap = (at(&a.rows, 30).ratio - at(&b.rows, 30).ratio).abs();
    ctx.le("agreement at n=30", "|ratio(2,3) - ratio(3,5)| < 1e-5", gap, 0.0, 1e-5, "n=30".into());
    let s50 = at(&a.rows, 50).partial_sum;
    ctx.le("divergence witness", "3 < partial_sum at n=50", 3.0, s50, -1e-12, "d1=2 d2=3".into());
    Ok(format!("ratio_20 = {r20}, partial sum at 50 = {s50:.6}"))
}

fn c7(ctx: &mut Ctx) -> Result<String> {
    let grid = sandwich_grid(16)?;
    let failures = grid.iter().filter(|(_, _, ok)| !ok).count();
    ctx.le("sandwich", "sandwich failures = 0", failures as f64, 0.0, 0.0, format!("{} instances", grid.len()));
    let exps: Vec<u32> = (1..=16).collect();
    let rows = trace_convergence(&exps, 1)?;
    let last = rows.last().expect("16 rows").distance;
    let alt = alternating_distance(16)?;
    ctx.le("alternating sum", "|distance - alternating| <= 1e-10", (last - alt).abs(), 0.0, 1e-10, "m=1 n_exp=16".into());
    ctx.le("small", "distance < 0.07", last, 0.07, -1e-15, "m=1 n_exp=16".into());
    for m in 1..=4u32 {
        let exps: Vec<u32> = (m..=16).collect();
        let rows = trace_convergence(&exps, m)?;
        let rises = rows.windows(2).filter(|w| w[1].distance >= w[0].distance).count();
        ctx.le("monotone", "non-decreasing steps = 0", rises as f64, 0.0, 0.0, format!("m={m} n_exp={m}..16"));
    }
    Ok(format!("{} sandwich instances, distance(16) = {last:.6}", grid.len()))
}

fn c8(ctx: &mut Ctx) -> Result<String> {
    let caps = Caps::default();
    let error_of = |f: f64| 2.0 * (1.0 - f * f).max(0.0).sqrt();
    let mut reference = f64::NAN;
    let mut worst: f64 = 0.0;
    for i in 0..10usize {
        let (resource, source, target) = optimal_instance(ctx.seed(&[]), i)?;
        let opt = error_of(optimal_bipartite_fidelity(&resource, &source, &target, &caps)?);
        let brute = error_of(brute_force_bipartite_fidelity(&resource, &source, &target, 20, ctx.seed(&[i as u64]))?);
        if i == 0 {
            reference = opt;
        }
        worst = worst.max((opt - brute).abs());
        ctx.le("oracle", "|formula - brute force| <= 1e-6", (opt - brute).abs(), 0.0, 1e-6, format!("instance={i}"));
    }
    ctx.le("pinned example", "|error - 1.18726| <= 1e-5", (reference - 1.18726).abs(), 0.0, 1e-5, "resource (2/3,1/3), |11> -> Bell".into());
    Ok(format!("10 instances, max gap {worst:e}, pinned error {reference:.6}"))
}

fn c9(ctx: &mut Ctx) -> Result<String> {
    for m in 1..=10u32 {
        let w = trace_nonembezzlement_witness(m, 2)?;
        ctx.le("witness", "|witness - 1| = 0", (w - 1.0).abs(), 0.0, 0.0, format!("m={m} d=2"));
    }
    let layout = SiteLayout::one_site_per_party(2, 2)?;
    let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let product = basis(&layout, 0)?;
    let bell = PartitionedPureState::normalized(layout, vec![o, z, z, o])?;
    let prefix = counting_index(2, 1601)?;
    let family = LtwFamily::new(FamilyConfig::new(2, ctx.seed(&[]), prefix))?;
    let out = ltw_embezzle(&family, &product, &bell, 0.1)?;
    let n = out.protocol.n;
    let inputs = format!("|00> -> Bell, level {} (n={n})", out.protocol.level);
    ctx.le("level", "1600 < n_k", 1600.0, n as f64, -0.5, inputs.clone());
    ctx.le("bound", "4/sqrt(n_k) < 0.1", 4.0 / (n as f64).sqrt(), 0.1, -1e-15, inputs.clone());
    ctx.le("exact", "exact_error <= cover-composed bound", out.report.exact_error, out.report.analytic_bound, BOUND_TOL, inputs.clone());
    let closed = closed_form_error(std::f64::consts::FRAC_1_SQRT_2, n);
    ctx.le("closed form", "|exact_error - closed form| <= 1e-9", (out.report.exact_error - closed).abs(), 0.0, 1e-9, inputs);
    Ok(format!("witness 1 for m=1..10; LTW error {:.6} at n={n}", out.report.exact_error))
}

fn c10(ctx: &mut Ctx) -> Result<String> {
    let mut worst: f64 = 0.0;
    let mut total = 0;
    for eps in [1e-2, 1e-3] {
        let trials: Vec<Result<_>> = (0..100u64)
            .into_par_iter()
            .map(|s| contraction_trial(3, 2, eps, ctx.seed(&[eps.to_bits(), s])))
            .collect();
        let mut violations = 0;
        for t in trials {
            let t = t?;
            total += 1;
            worst = worst.max(t.post_error / (6.0 * eps.sqrt()));
            violations += usize::from(t.post_error > 6.0 * eps.sqrt());
            ctx.le("hypothesis", "pre_error <= epsilon", t.pre_error, eps, 0.0, format!("epsilon={eps} seed={}", t.seed));
        }
        ctx.le("bound", "violations of post_error <= 6 sqrt(epsilon)", violations as f64, 0.0, 0.0, format!("epsilon={eps} trials=100"));
    }
    Ok(format!("{total} trials, max post/bound {worst:.4}"))
}

fn c11(ctx: &mut Ctx) -> Result<String> {
    let layout = SiteLayout::one_site_per_party(2, 2)?;
    let family = LtwFamily::new(FamilyConfig::new(2, ctx.seed(&[]), 10_000))?;
    let mut worst: f64 = 0.0;
    for s in 0..3u64 {
        let mut rng = rng_from_seed(ctx.seed(&[s]));
        let psi = haar_state(layout.clone(), &mut rng)?;
        let phi = haar_state(layout.clone(), &mut rng)?;
        let out = ltw_embezzle(&family, &psi, &phi, 0.5)?;
        let rep = consistency_check(&family, &out.protocol, &psi, &phi, 40_000, 2, 10_000)?;
        worst = worst.max(rep.discrepancy);
        let inputs = format!("pair={s} level={} extended to 40000", out.protocol.level);
        ctx.le("re-evaluation", "|error(prefix) - error(extended)| <= 1e-15", rep.discrepancy, 0.0, 1e-15, inputs.clone());
        ctx.le("covers", "fingerprint mismatches = 0", f64::from(u8::from(!rep.fingerprints_match)), 0.0, 0.0, inputs.clone());
        ctx.le("marginals", "max |norm - 1| over level factors <= 1e-12", rep.max_factor_norm_deviation, 0.0, 1e-12, inputs.clone());
        ctx.le("marginals checked", "0 < factors checked", 0.0, rep.factors_checked as f64, -0.5, inputs);
    }
    Ok(format!("3 protocols, max discrepancy {worst:e}"))
}

type CriterionFn = fn(&mut Ctx) -> Result<String>;
const RUNNERS: [CriterionFn; 11] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11];

fn run_one(id: usize, opts: &SuiteOptions) -> CriterionOutcome {
    let start = Instant::now();
    let mut ctx = Ctx {
        id,
        seed: opts.seed,
        corrupt: opts.corrupt == Some(id),
        checks: Vec::new(),
    };
    let result = RUNNERS[id - 1](&mut ctx);
    finish(id, ctx.checks, result, start.elapsed())
}

fn finish(id: usize, checks: Vec<Check>, result: Result<String>, runtime: Duration) -> CriterionOutcome {
    let (passed, detail) = match result {
        Ok(detail) => (checks.iter().all(|c| c.holds), detail),
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionOutcome {
        id,
        name: CRITERIA[id - 1].into(),
        passed,
        detail,
        checks,
        runtime,
    }
}

fn run_criteria(opts: &SuiteOptions) -> Vec<CriterionOutcome> {
    (1..=RUNNERS.len()).into_par_iter().map(|id| run_one(id, opts)).collect()
}

/// Serialized outcomes of criteria 1–11 (runtimes excluded).
fn fingerprint(outcomes: &[CriterionOutcome]) -> String {
    serde_json::to_string(outcomes).expect("outcomes serialize")
}

/// Run every criterion. Criterion 12 reruns 1–11 and compares the
/// serialized outcomes byte for byte.
pub fn run_suite(opts: &SuiteOptions) -> Result<Vec<CriterionOutcome>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| embezzle_core::LabError::InvalidArgument(format!("worker pool: {e}")))?;
    pool.install(|| {
        let start = Instant::now();
        let mut outcomes = run_criteria(opts);
        let first = fingerprint(&outcomes);
        let second = fingerprint(&run_criteria(opts));
        let mut ctx = Ctx {
            id: 12,
            seed: opts.seed,
            corrupt: opts.corrupt == Some(12),
            checks: Vec::new(),
        };
        let differing = first.bytes().zip(second.bytes()).filter(|(a, b)| a != b).count() + first.len().abs_diff(second.len());
        ctx.le("byte identity", "differing bytes between two runs = 0", differing as f64, 0.0, 0.0, format!("{} bytes", first.len()));
        let elapsed = start.elapsed();
        let over = f64::from(u8::from(elapsed.as_secs_f64() >= 600.0));
        ctx.le("runtime", "runs over 600 s = 0", over, 0.0, 0.0, "two full runs".into());
        let detail = format!("{} report bytes identical across runs", first.len());
        outcomes.push(finish(12, ctx.checks, Ok(detail), elapsed));
        Ok(outcomes)
    })
}

pub fn suite_report(opts: &SuiteOptions, outcomes: &[CriterionOutcome]) -> Report {
    let mut config = std::collections::BTreeMap::new();
    config.insert("workers".to_string(), opts.workers.to_string());
    if let Some(c) = opts.corrupt {
        config.insert("corrupt".to_string(), c.to_string());
    }
    let mut report = Report::new("suite", Some(opts.seed), config);
    let mut table = Table::new("criteria", &["criterion", "name", "passed", "detail"]);
    for o in outcomes {
        table.push(vec![o.id.into(), o.name.clone().into(), o.passed.into(), o.detail.clone().into()]);
        for c in &o.checks {
            let mut c = c.clone();
            c.name = format!("criterion {}: {}", o.id, c.name);
            report.checks.push(c);
        }
    }
    report.tables.push(table);
    report
}

/// One line per criterion: status, runtime, name, detail.
pub fn render_matrix(outcomes: &[CriterionOutcome]) -> String {
    outcomes
        .iter()
        .map(|o| {
            format!(
                "criterion {:>2} {:<26} {} {:>8.2}s  {}\n",
                o.id,
                o.name,
                if o.passed { "PASS" } else { "FAIL" },
                o.runtime.as_secs_f64(),
                o.detail
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupted_tolerance_names_the_failure() {
        let clean = run_one(4, &SuiteOptions::default());
        assert!(clean.passed);
        let opts = SuiteOptions {
            corrupt: Some(4),
            ..SuiteOptions::default()
        };
        let bad = run_one(4, &opts);
        assert!(!bad.passed);
        assert!(render_matrix(&[bad]).contains("criterion  4 spectrum oracle"));
    }
}
