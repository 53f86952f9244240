use embezzle_core::catalyst::closed_form_error;
use embezzle_core::ltw::counting::counting_index;
use embezzle_core::ltw::{ltw_embezzle, FamilyConfig, LtwFamily};
use embezzle_core::tensor::{PartitionedPureState, SiteLayout};
use embezzle_core::vdh::trace_nonembezzlement_witness;
use num_complex::Complex64 as C64;

fn product_and_bell() -> (PartitionedPureState, PartitionedPureState) {
    let layout = SiteLayout::one_site_per_party(2, 2).unwrap();
    let product = PartitionedPureState::basis(layout.clone(), 0).unwrap();
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    let bell = PartitionedPureState::new(layout, vec![s, z, z, s]).unwrap();
    (product, bell)
}

#[test]
fn product_to_bell_at_level_1601() {
    let (product, bell) = product_and_bell();
    let prefix = counting_index(2, 1601).unwrap();
    let family = LtwFamily::new(FamilyConfig::new(2, 11, prefix)).unwrap();
    let out = ltw_embezzle(&family, &product, &bell, 0.1).unwrap();
    assert_eq!(out.protocol.n, 1601);
    assert!(out.report.analytic_bound < 0.1);
    assert!(out.report.within_bound());
    // both endpoints sit on lattice points, so the shift error is the closed form
    let expected = closed_form_error(std::f64::consts::FRAC_1_SQRT_2, 1601);
    assert!((out.report.exact_error - expected).abs() < 1e-9);
    for m in 1..=10 {
        assert_eq!(trace_nonembezzlement_witness(m, 2).unwrap(), 1.0);
    }
}

#[test]
fn short_prefix_asks_for_extension() {
    let (product, bell) = product_and_bell();
    let family = LtwFamily::new(FamilyConfig::new(2, 11, 1000)).unwrap();
    let err = ltw_embezzle(&family, &product, &bell, 0.1).unwrap_err();
    assert!(err.to_string().contains("extend the counting prefix"));
}
