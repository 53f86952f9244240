//! Property tests of structural invariants against brute-force oracles.

use embezzle_core::caps::Caps;
use embezzle_core::catalyst::{build_catalyst, dense_embezzle_error, embezzle_error};
use embezzle_core::diagonal::catalyst::site;
use embezzle_core::diagonal::{approx_catalyst_error, ltw_spectrum_bruteforce, ltw_spectrum_closed_form, rationalize_spectrum};
use embezzle_core::tensor::linalg::l1_distance;
use embezzle_core::tensor::random::{haar_state, random_diagonal, rng_from_seed, simplex_point};
use embezzle_core::tensor::{
    pure_trace_distance, sorted_orbit_distance, trace_distance, DiagonalState, PartialTrace, SiteLayout, Spectrum,
};
use proptest::prelude::*;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orbit_distance_is_the_least_permuted_distance(seed in any::<u64>(), dim in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let p = simplex_point(dim, &mut rng);
        let q = simplex_point(dim, &mut rng);
        let best = permutations(dim)
            .iter()
            .map(|perm| l1_distance(&p, &perm.iter().map(|&i| q[i]).collect::<Vec<_>>()))
            .fold(f64::INFINITY, f64::min);
        let fast = sorted_orbit_distance(&Spectrum::from_unsorted(p), &Spectrum::from_unsorted(q));
        prop_assert!((fast - best).abs() < 1e-12);
    }

    #[test]
    fn pure_trace_distance_matches_rank_one_density(seed in any::<u64>(), d in 2usize..4) {
        let caps = Caps::default();
        let mut rng = rng_from_seed(seed);
        let layout = SiteLayout::one_site_per_party(2, d).unwrap();
        let a = haar_state(layout.clone(), &mut rng).unwrap();
        let b = haar_state(layout, &mut rng).unwrap();
        let dense = trace_distance(&a.to_density(&caps).unwrap(), &b.to_density(&caps).unwrap(), &caps).unwrap();
        prop_assert!((pure_trace_distance(&a, &b).unwrap() - dense).abs() < 1e-10);
    }

    #[test]
    fn diagonal_partial_trace_matches_dense(seed in any::<u64>(), keep in 0usize..3) {
        let caps = Caps::default();
        let mut rng = rng_from_seed(seed);
        let layout = SiteLayout::new(vec![2, 3, 2], vec![0, 1, 2]).unwrap();
        let p = random_diagonal(layout, &mut rng).unwrap();
        let fast = p.partial_trace(&[keep], &caps).unwrap();
        let dense = p.to_density(&caps).unwrap().partial_trace(&[keep], &caps).unwrap();
        for (i, &x) in fast.probabilities().iter().enumerate() {
            prop_assert!((dense.matrix()[(i, i)].re - x).abs() < 1e-14);
        }
    }

    #[test]
    fn structured_error_matches_dense_oracle(seed in any::<u64>(), n in 2usize..6) {
        let caps = Caps::default();
        let mut rng = rng_from_seed(seed);
        let layout = SiteLayout::one_site_per_party(2, 2).unwrap();
        let psi = haar_state(layout.clone(), &mut rng).unwrap();
        let phi = haar_state(layout, &mut rng).unwrap();
        let rep = embezzle_error(&psi, &phi, n).unwrap();
        let dense = dense_embezzle_error(&psi, &phi, n, &caps).unwrap();
        prop_assert!((rep.exact_error - dense).abs() < 1e-10);
        prop_assert!(rep.within_bound());
        let c = build_catalyst(&psi, &phi, n).unwrap().c_n;
        prop_assert!(c >= ((n + 1) as f64).sqrt() - 1e-12 && c <= (n + 1) as f64 + 1e-12);
    }

    #[test]
    fn diagonal_shift_error_within_bound(seed in any::<u64>(), d in 2usize..4, n in 2usize..8) {
        let caps = Caps::default();
        let mut rng = rng_from_seed(seed);
        let a = random_diagonal(site(d).unwrap(), &mut rng).unwrap();
        let b = random_diagonal(site(d).unwrap(), &mut rng).unwrap();
        let rep = approx_catalyst_error(&a, &b, n, &caps).unwrap();
        prop_assert!(rep.within_bound());
        prop_assert!((rep.exact_error - rep.reference_error.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rationalization_is_exact_and_close(seed in any::<u64>(), dim in 1usize..6, tol_exp in 2i32..8) {
        let mut rng = rng_from_seed(seed);
        let p = simplex_point(dim, &mut rng);
        let tol = 10f64.powi(-tol_exp);
        let r = rationalize_spectrum(&p, tol, 1 << 40).unwrap();
        let total = r.iter().fold(num_rational::Ratio::new(0u64, 1), |a, b| a + b);
        prop_assert_eq!(total, num_rational::Ratio::new(1, 1));
        for (x, q) in p.iter().zip(&r) {
            prop_assert!((*q.numer() as f64 / *q.denom() as f64 - x).abs() <= tol);
        }
    }
}

#[test]
fn spectra_agree_over_the_brute_force_range() {
    for d in 2..=3usize {
        for n in 2..=12usize {
            if (d as u128).pow(n as u32) > 1_000_000 {
                continue;
            }
            let a = ltw_spectrum_closed_form(n, d).unwrap();
            let b = ltw_spectrum_bruteforce(n, d).unwrap();
            assert_eq!(a.total_multiplicity(), (d as u64).pow(n as u32));
            assert_eq!(a.rows.len(), b.rows.len());
            for (x, y) in a.rows.iter().zip(&b.rows) {
                assert_eq!(x.multiplicity, y.multiplicity);
                assert!((x.lambda - y.lambda).abs() < 1e-12);
            }
            assert!(a.rows.windows(2).all(|w| w[0].lambda > w[1].lambda));
            assert_eq!(a.rows.last().unwrap().lambda, 0.0);
        }
    }
}

#[test]
fn point_to_uniform_errors_are_the_closed_form() {
    let caps = Caps::default();
    for d in 2..=3usize {
        for n in 2..=10usize {
            let point = DiagonalState::point_mass(site(d).unwrap(), 0).unwrap();
            let uniform = DiagonalState::uniform(site(d).unwrap());
            let rep = approx_catalyst_error(&point, &uniform, n, &caps).unwrap();
            let closed = 2.0 * (1.0 - (d as f64).powi(1 - n as i32)) / (n as f64 - 1.0);
            assert!((rep.exact_error - closed).abs() < 1e-12);
        }
    }
}
