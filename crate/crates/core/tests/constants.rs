//! Closed-form model constants checked against direct evaluation.

mod common;

use sinrcast::adversary::FanFamily;
use sinrcast::geometry::dir_set;
use sinrcast::schedules::flat_constant;
use sinrcast::ModelParams;

#[test]
fn range_and_pivotal_cell() {
    let p = ModelParams::default();
    // r = (1+ε)^(-1/α) with unit power, noise and threshold.
    let r = 1.5f64.powf(-1.0 / 3.0);
    assert!((p.range() - r).abs() < 1e-15);
    assert!((p.pivotal() - r / 2f64.sqrt()).abs() < 1e-15);
    assert!((common::range_of(&p) - r).abs() < 1e-15);
}

#[test]
fn twenty_neighbour_box_offsets() {
    let dirs = dir_set();
    assert_eq!(dirs.len(), 20);
    // Offsets within box-distance 2, without the corners and the centre.
    for (a, b) in dirs {
        assert!(a.abs() <= 2 && b.abs() <= 2 && (a, b) != (0, 0) && !(a.abs() == 2 && b.abs() == 2));
    }
}

#[test]
fn dilution_threshold_formula() {
    // d ≥ 3 + 2√2·(8·(1+ζ_n(α−1)) / (1 − r^α))^(1/α) with r^α = 1/(1+ε).
    for (alpha, eps, n) in [(3.0, 0.5, 64u64), (2.5, 0.2, 500), (4.0, 1.0, 10)] {
        let zeta: f64 = (1..=n).map(|i| (i as f64).powf(1.0 - alpha)).sum();
        let one_minus = 1.0 - 1.0 / (1.0 + eps);
        let d = 3.0 + 2.0 * 2f64.sqrt() * (8.0 * (1.0 + zeta) / one_minus).powf(1.0 / alpha);
        assert_eq!(flat_constant(alpha, eps, n).unwrap(), d.ceil() as u32);
    }
    // 1 + π²/6 ≈ 2.645 and 1 − r³ = 1/3 give 15 for every large n.
    for n in [1_000, 10_000, 1_000_000] {
        assert_eq!(flat_constant(3.0, 0.5, n).unwrap(), 15);
    }
}

#[test]
fn fan_blockers_are_ceil_two_to_half_alpha() {
    for (alpha, c) in [(3.0, 3), (2.5, 3), (4.0, 4)] {
        let fam = FanFamily::new(8, 5, ModelParams { alpha, ..ModelParams::default() }, 64).unwrap();
        assert_eq!(fam.blockers(), c);
        assert_eq!(fam.layer_bound(), (8 / c) as u64 - 1);
    }
}
