//! One function per experiment; each returns a [`Report`] whose checks
//! decide the exit status.

use std::collections::BTreeMap;

use embezzle_core::caps::Caps;
use embezzle_core::catalyst::{build_catalyst, catalyst_bound, embezzle_error};
use embezzle_core::diagonal::catalyst::{point_to_uniform_error, shift_bound, site};
use embezzle_core::diagonal::{
    approx_catalyst_error, contraction_trial, ltw_spectrum_bruteforce, ltw_spectrum_closed_form,
    mixed::mixed_with_tolerance, ratio_probe, DiagonalFamily,
};
use embezzle_core::ltw::{ltw_embezzle, FamilyConfig, LtwFamily};
use embezzle_core::report::{BoundKind, BOUND_TOL};
use embezzle_core::tensor::random::{derive_seed, haar_state, random_diagonal, rng_from_seed, simplex_point};
use embezzle_core::tensor::{DiagonalState, PartitionedPureState, SiteLayout, Spectrum};
use embezzle_core::vdh::{
    alternating_distance, brute_force_bipartite_fidelity, optimal_bipartite_fidelity, sandwich_factors,
    trace_convergence, vdh_restrict,
};
use embezzle_core::{LabError, Result};
use num_complex::Complex64 as C64;

use crate::report::{Check, Report, Table};

fn config(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn pair_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(seed, |s, &p| derive_seed(s, p))
}

pub fn catalyst(d: usize, n_parties: usize, ns: &[usize], pairs: usize, seed: u64) -> Result<Report> {
    let mut report = Report::new(
        "catalyst",
        Some(seed),
        config(&[
            ("d", d.to_string()),
            ("N", n_parties.to_string()),
            ("n", list(ns)),
            ("pairs", pairs.to_string()),
        ]),
    );
    report.bound("bound", BoundKind::CatalystShift.name(), BoundKind::CatalystShift.formula());
    let layout = SiteLayout::one_site_per_party(n_parties, d)?;
    let mut table = Table::new(
        "errors",
        &["n", "pair", "overlap", "normalization", "exact_error", "closed_form", "bound"],
    );
    for &n in ns {
        let mut worst: f64 = 0.0;
        for pair in 0..pairs {
            let mut rng = rng_from_seed(pair_seed(seed, &[n as u64, pair as u64]));
            let psi = haar_state(layout.clone(), &mut rng)?;
            let phi = haar_state(layout.clone(), &mut rng)?;
            let rep = embezzle_error(&psi, &phi, n)?;
            let rec = build_catalyst(&psi, &phi, n)?;
            worst = worst.max(rep.exact_error);
            table.push(vec![
                n.into(),
                pair.into(),
                rec.overlap.norm().into(),
                rec.c_n.into(),
                rep.exact_error.into(),
                rep.reference_error.unwrap_or(f64::NAN).into(),
                rep.analytic_bound.into(),
            ]);
        }
        report.checks.push(Check::le(
            "catalyst shift",
            "exact_error <= 2/sqrt(n+1)",
            worst,
            catalyst_bound(n) + BOUND_TOL,
            format!("d={d} N={n_parties} n={n} pairs={pairs} seed={seed}"),
        ));
    }
    report.tables.push(table);
    Ok(report)
}

pub fn ltw(d: usize, n_parties: usize, epsilon: f64, prefix: usize, pairs: usize, seed: u64) -> Result<Report> {
    let mut report = Report::new(
        "ltw",
        Some(seed),
        config(&[
            ("d", d.to_string()),
            ("N", n_parties.to_string()),
            ("epsilon", epsilon.to_string()),
            ("prefix", prefix.to_string()),
            ("pairs", pairs.to_string()),
        ]),
    );
    report.bound("bound", BoundKind::CoverComposed.name(), BoundKind::CoverComposed.formula());
    let family = LtwFamily::new(FamilyConfig::new(n_parties, seed, prefix))?;
    let layout = SiteLayout::one_site_per_party(n_parties, d)?;
    let mut table = Table::new(
        "transitions",
        &["pair", "level", "n", "source_distance", "target_distance", "exact_error", "bound", "epsilon"],
    );
    for pair in 0..pairs {
        let mut rng = rng_from_seed(pair_seed(seed, &[u64::MAX, pair as u64]));
        let psi = haar_state(layout.clone(), &mut rng)?;
        let phi = haar_state(layout.clone(), &mut rng)?;
        let out = ltw_embezzle(&family, &psi, &phi, epsilon)?;
        let p = &out.protocol;
        table.push(vec![
            pair.into(),
            p.level.into(),
            p.n.into(),
            p.source_distance.into(),
            p.target_distance.into(),
            out.report.exact_error.into(),
            out.report.analytic_bound.into(),
            epsilon.into(),
        ]);
        let inputs = format!("d={d} N={n_parties} pair={pair} seed={seed} level={}", p.level);
        report.checks.push(Check::le(
            "cover-composed shift",
            "exact_error <= 2/sqrt(n+1) + d_source + d_target",
            out.report.exact_error,
            out.report.analytic_bound + BOUND_TOL,
            inputs.clone(),
        ));
        report.checks.push(Check::le(
            "target accuracy",
            "2/sqrt(n+1) + d_source + d_target < epsilon",
            out.report.analytic_bound,
            epsilon,
            inputs,
        ));
        report.protocols.push(serde_json::to_value(p).expect("protocols serialize"));
    }
    report.tables.push(table);
    Ok(report)
}

pub fn vdh(m: u32, n_exps: &[u32]) -> Result<Report> {
    let mut report = Report::new("vdh", None, config(&[("m", m.to_string()), ("n_exp", list(n_exps))]));
    report.bound("lower_factor", "sandwich lower", "h_{2^(n-m)}/h_{2^n}");
    report.bound("upper_factor", "sandwich upper", "(2^m + h_{2^(n-m)})/h_{2^n}");
    let rows = trace_convergence(n_exps, m)?;
    let mut table = Table::new(
        "convergence",
        &["n_exp", "m", "distance", "alternating", "lower_factor", "upper_factor", "min_scaled", "max_scaled"],
    );
    for row in rows {
        let restricted = vdh_restrict(row.n_exp, m)?;
        let scale = (1u64 << m) as f64;
        let lo = restricted.probabilities().iter().copied().fold(f64::INFINITY, f64::min) * scale;
        let hi = restricted.probabilities().iter().copied().fold(0.0, f64::max) * scale;
        let alternating = if m == 1 { alternating_distance(row.n_exp)? } else { f64::NAN };
        let inputs = format!("n_exp={} m={m}", row.n_exp);
        report.checks.push(Check::le("sandwich lower", "lower_factor <= 2^m * entry", row.lower_bound_factor, lo * (1.0 + 1e-12), inputs.clone()));
        report.checks.push(Check::le("sandwich upper", "2^m * entry <= upper_factor", hi, row.upper_bound_factor * (1.0 + 1e-12), inputs.clone()));
        if m == 1 {
            report.checks.push(Check::le(
                "alternating sum",
                "|distance - alternating| <= 1e-10",
                (row.distance - alternating).abs(),
                1e-10,
                inputs,
            ));
        }
        table.push(vec![
            row.n_exp.into(),
            m.into(),
            row.distance.into(),
            alternating.into(),
            row.lower_bound_factor.into(),
            row.upper_bound_factor.into(),
            lo.into(),
            hi.into(),
        ]);
    }
    report.tables.push(table);
    Ok(report)
}

pub fn diagonal_spectrum(n: usize, d: usize) -> Result<Report> {
    let mut report = Report::new("diagonal spectrum", None, config(&[("n", n.to_string()), ("d", d.to_string())]));
    let closed = ltw_spectrum_closed_form(n, d)?;
    let mut table = Table::new("spectrum", &["lambda", "multiplicity"]);
    for r in &closed.rows {
        table.push(vec![r.lambda.into(), r.multiplicity.into()]);
    }
    report.checks.push(Check::le(
        "normalization",
        "|sum m_j lambda_j - 1| <= 1e-12",
        (closed.total_weight() - 1.0).abs(),
        1e-12,
        format!("n={n} d={d}"),
    ));
    if let Ok(brute) = ltw_spectrum_bruteforce(n, d) {
        let gap = if brute.rows.len() == closed.rows.len()
            && brute.rows.iter().zip(&closed.rows).all(|(a, b)| a.multiplicity == b.multiplicity)
        {
            brute.rows.iter().zip(&closed.rows).map(|(a, b)| (a.lambda - b.lambda).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        report.checks.push(Check::le("brute force", "max |closed - brute| <= 1e-12", gap, 1e-12, format!("n={n} d={d}")));
    }
    report.tables.push(table);
    Ok(report)
}

pub fn diagonal_error(ns: &[usize], d: usize, seed: Option<u64>, pairs: usize) -> Result<Report> {
    let caps = Caps::from_env();
    let mut cfg = vec![("n", list(ns)), ("d", d.to_string())];
    if seed.is_some() {
        cfg.push(("pairs", pairs.to_string()));
    }
    let mut report = Report::new("diagonal error", seed, config(&cfg));
    report.bound("bound", BoundKind::DiagonalShift.name(), BoundKind::DiagonalShift.formula());
    let mut table = Table::new("errors", &["n", "pair", "exact_error", "reference", "bound"]);
    for &n in ns {
        let mut inputs = Vec::new();
        match seed {
            None => inputs.push((
                DiagonalState::point_mass(site(d)?, 0)?,
                DiagonalState::uniform(site(d)?),
            )),
            Some(s) => {
                for pair in 0..pairs {
                    let mut rng = rng_from_seed(pair_seed(s, &[n as u64, pair as u64]));
                    inputs.push((random_diagonal(site(d)?, &mut rng)?, random_diagonal(site(d)?, &mut rng)?));
                }
            }
        }
        for (pair, (a, b)) in inputs.iter().enumerate() {
            let rep = approx_catalyst_error(a, b, n, &caps)?;
            let reference = if seed.is_none() { point_to_uniform_error(d, n) } else { rep.reference_error.unwrap_or(f64::NAN) };
            let tag = format!("n={n} d={d} pair={pair}");
            report.checks.push(Check::le("diagonal shift", "exact_error <= 2/(n-1)", rep.exact_error, shift_bound(n) + BOUND_TOL, tag.clone()));
            report.checks.push(Check::le("residual", "|exact_error - reference| <= 1e-12", (rep.exact_error - reference).abs(), 1e-12, tag));
            table.push(vec![n.into(), pair.into(), rep.exact_error.into(), reference.into(), shift_bound(n).into()]);
        }
    }
    report.tables.push(table);
    Ok(report)
}

pub fn diagonal_ratio(d1: usize, d2: usize, n_max: usize) -> Result<Report> {
    let mut report = Report::new(
        "diagonal ratio",
        None,
        config(&[("d1", d1.to_string()), ("d2", d2.to_string()), ("n_max", n_max.to_string())]),
    );
    report.bound("ratio_closed_form", "eigenvalue ratio", "((d1-1)/(d2-1))*(1-d2^(1-n))/(1-d1^(1-n))");
    report.bound("harmonic_lower_bound", "partial sum lower bound", "(min(d1,d2)/d1)*h_(n-1)");
    let probe = ratio_probe(d1, d2, n_max)?;
    let mut table = Table::new(
        "ratios",
        &["n", "ratio", "ratio_closed_form", "limit", "partial_sum", "harmonic_lower_bound"],
    );
    let mut worst: f64 = 0.0;
    for r in &probe.rows {
        worst = worst.max((r.ratio - r.ratio_closed_form).abs());
        table.push(vec![
            r.n.into(),
            r.ratio.into(),
            r.ratio_closed_form.into(),
            probe.limit.into(),
            r.partial_sum.into(),
            r.harmonic_lower_bound.into(),
        ]);
    }
    report.checks.push(Check::le("ratio closed form", "max |ratio - closed form| <= 1e-14", worst, 1e-14, format!("d1={d1} d2={d2}")));
    report.tables.push(table);
    Ok(report)
}

pub fn diagonal_mixed(target: &[f64], epsilon: f64, prefix: usize, tolerance: f64) -> Result<Report> {
    let caps = Caps::from_env();
    let mut report = Report::new(
        "diagonal mixed",
        None,
        config(&[
            ("target", list(target)),
            ("epsilon", epsilon.to_string()),
            ("prefix", prefix.to_string()),
            ("tolerance", tolerance.to_string()),
        ]),
    );
    report.bound("bound", BoundKind::PolarLift.name(), BoundKind::PolarLift.formula());
    let c = mixed_with_tolerance(target, &DiagonalFamily { prefix }, epsilon, tolerance, &caps)?;
    let mut table = Table::new(
        "construction",
        &["measured_error", "contraction_error", "rationalization_gap", "common_denominator", "resource_dim", "kernel_size", "bound"],
    );
    table.push(vec![
        c.measured_error().into(),
        c.contraction_error.into(),
        c.rationalization_gap.into(),
        c.common_denominator.into(),
        c.resource_dim.into(),
        c.kernel_size.into(),
        c.report.analytic_bound.into(),
    ]);
    let inputs = format!("target={} epsilon={epsilon}", list(target));
    report.checks.push(Check::le(
        "polar lift",
        "measured_error <= 6*sqrt(2*eps) + 2*gap",
        c.measured_error(),
        c.report.analytic_bound + BOUND_TOL,
        inputs.clone(),
    ));
    report.checks.push(Check::le("isometry", "|V*V - 1| <= 1e-10", c.isometry_defect, 1e-10, inputs));
    report.tables.push(table);
    report.protocols.push(serde_json::to_value(&c).expect("constructions serialize"));
    Ok(report)
}

fn two_qubits(amplitudes: Vec<C64>) -> Result<PartitionedPureState> {
    PartitionedPureState::normalized(SiteLayout::one_site_per_party(2, 2)?, amplitudes)
}

/// The pinned instance: resource `(2/3, 1/3)`, `|11⟩ → (|00⟩ + |11⟩)/√2`.
pub fn reference_instance() -> Result<(Spectrum, PartitionedPureState, PartitionedPureState)> {
    let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    Ok((
        Spectrum::new(vec![2.0 / 3.0, 1.0 / 3.0])?,
        two_qubits(vec![z, z, z, o])?,
        two_qubits(vec![o, z, z, o])?,
    ))
}

/// Instance 0 is the pinned one; the rest are seeded random qubit pairs with
/// a random two-level resource.
pub fn optimal_instance(seed: u64, index: usize) -> Result<(Spectrum, PartitionedPureState, PartitionedPureState)> {
    if index == 0 {
        return reference_instance();
    }
    let mut rng = rng_from_seed(pair_seed(seed, &[index as u64]));
    let layout = SiteLayout::one_site_per_party(2, 2)?;
    let resource = Spectrum::from_unsorted(simplex_point(2, &mut rng));
    Ok((resource, haar_state(layout.clone(), &mut rng)?, haar_state(layout, &mut rng)?))
}

fn error_of(f: f64) -> f64 {
    2.0 * (1.0 - f * f).max(0.0).sqrt()
}

pub fn probe_optimal(seed: u64, instances: usize, restarts: usize) -> Result<Report> {
    let caps = Caps::from_env();
    let mut report = Report::new(
        "probe optimal",
        Some(seed),
        config(&[("instances", instances.to_string()), ("restarts", restarts.to_string())]),
    );
    report.bound("optimal_error", "sorted Schmidt optimum", "2*sqrt(1 - (sum sqrt(p_i q_i))^2)");
    let mut table = Table::new("instances", &["instance", "optimal_error", "brute_force_error", "difference"]);
    for i in 0..instances {
        let (resource, source, target) = optimal_instance(seed, i)?;
        let opt = error_of(optimal_bipartite_fidelity(&resource, &source, &target, &caps)?);
        let brute = error_of(brute_force_bipartite_fidelity(&resource, &source, &target, restarts, pair_seed(seed, &[i as u64, 1]))?);
        let diff = (opt - brute).abs();
        report.checks.push(Check::le("optimal error oracle", "|formula - brute force| <= 1e-6", diff, 1e-6, format!("instance={i} seed={seed}")));
        table.push(vec![i.into(), opt.into(), brute.into(), diff.into()]);
    }
    report.tables.push(table);
    Ok(report)
}

pub fn probe_polar(seed: u64, trials: usize, epsilons: &[f64], k: usize, d: usize) -> Result<Report> {
    let mut report = Report::new(
        "probe polar",
        Some(seed),
        config(&[
            ("trials", trials.to_string()),
            ("epsilon", list(epsilons)),
            ("k", k.to_string()),
            ("d", d.to_string()),
        ]),
    );
    report.bound("bound", "polar lift of a contraction", "6*sqrt(pre_error)");
    let mut table = Table::new("trials", &["epsilon", "trial", "pre_error", "post_error", "bound"]);
    for &eps in epsilons {
        let mut worst: f64 = 0.0;
        for t in 0..trials {
            let trial = contraction_trial(k, d, eps, pair_seed(seed, &[t as u64]))?;
            worst = worst.max(trial.post_error / trial.bound);
            table.push(vec![eps.into(), t.into(), trial.pre_error.into(), trial.post_error.into(), trial.bound.into()]);
            if trial.pre_error > eps {
                return Err(LabError::Numerical(format!("trial {t} missed the hypothesis at {eps}")));
            }
        }
        report.checks.push(Check::le("polar lift", "max post_error / (6*sqrt(pre_error)) <= 1", worst, 1.0, format!("epsilon={eps} trials={trials} seed={seed}")));
    }
    report.tables.push(table);
    Ok(report)
}

/// Sandwich factors for every `1 <= m <= min(4, n_exp)`, `n_exp <= n_max`.
pub fn sandwich_grid(n_max: u32) -> Result<Vec<(u32, u32, bool)>> {
    let mut out = Vec::new();
    for n_exp in 1..=n_max {
        for m in 1..=n_exp.min(4) {
            let (lo, hi) = sandwich_factors(n_exp, m)?;
            let r = vdh_restrict(n_exp, m)?;
            let scale = (1u64 << m) as f64;
            let ok = r
                .probabilities()
                .iter()
                .all(|&p| lo <= p * scale * (1.0 + 1e-12) && p * scale <= hi * (1.0 + 1e-12));
            out.push((n_exp, m, ok));
        }
    }
    Ok(out)
}
