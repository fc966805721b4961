mod common;

use common::criteria;

#[test]
fn activation_rises_to_one_then_decays() {
    let curve = criteria::module1_active_curve();
    assert!(criteria::rises_then_falls(&curve), "{curve:?}");
    assert_eq!(curve[0].1, 0.0);
}

#[test]
fn k0_sweep_orders_late_curves() {
    let curves = criteria::k0_sweep();
    assert_eq!(curves.keys().collect::<Vec<_>>(), ["0.5", "1.66", "5"]);
    assert!(criteria::late_ordered(&curves), "{curves:?}");
}

#[test]
fn k38_sweep_faster_export() {
    let curves = criteria::k38_sweep();
    assert!(criteria::grows_faster(&curves["0.01"], &curves["0.1"]), "{curves:?}");
}

#[test]
fn ste12_ratio_nondecreasing() {
    let ratio = criteria::module7_ratio();
    assert!(criteria::nondecreasing(&ratio, 0.02), "{ratio:?}");
    assert!(ratio.last().unwrap().1 > 0.9);
}

#[test]
fn shape_helpers_reject_bad_shapes() {
    let flat: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 0.5)).collect();
    assert!(!criteria::rises_then_falls(&flat));
    let dip = [(0.0, 0.1), (1.0, 0.5), (2.0, 0.4), (3.0, 0.6)];
    assert!(!criteria::nondecreasing(&dip, 0.02));
    assert!(criteria::nondecreasing(&dip, 0.2));
}

#[test]
fn distributions_conserved_everywhere() {
    let outcome = criteria::conservation();
    assert!(outcome.pass, "{}", outcome.detail);
}
