mod common;

use tripod::specfun::{bessel_j0, bessel_j1, j0, j1, j1_over_x, BesselAccuracy};

fn sample_points() -> impl Iterator<Item = f64> {
    (0..=4000).map(|k| k as f64 * 0.005).chain([1e-8, 1e-3, 1.999_999, 2.000_001, 19.999])
}

#[test]
fn j0_j1_match_extended_precision_series() {
    let mut worst: f64 = 0.0;
    for x in sample_points() {
        let (r0, r1) = common::bessel_series(x);
        let acc = BesselAccuracy::at(x);
        assert!(acc.accepts(j0(x), r0), "J0({x}) = {} vs {r0}", j0(x));
        assert!(acc.accepts(j1(x), r1), "J1({x}) = {} vs {r1}", j1(x));
        if r0.abs() > 1e-3 {
            worst = worst.max(((j0(x) - r0) / r0).abs());
        }
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn large_arguments_match_series() {
    for x in [25.0, 31.6, 40.0] {
        let (r0, r1) = common::bessel_series(x);
        assert!((j0(x) - r0).abs() < 1e-13, "J0({x})");
        assert!((j1(x) - r1).abs() < 1e-13, "J1({x})");
    }
}

#[test]
fn parity_is_exact() {
    for x in sample_points().chain([35.0, 123.4, 1e4]) {
        assert_eq!(j0(-x), j0(x));
        assert_eq!(j1(-x), -j1(x));
    }
}

#[test]
fn derivative_identity() {
    // J0' = -J1 and (x J1)' = x J0
    let h = 1e-5;
    for k in 1..400 {
        let x = k as f64 * 0.1;
        let d0 = (j0(x + h) - j0(x - h)) / (2.0 * h);
        assert!((d0 + j1(x)).abs() < 1e-9, "x = {x}");
        let d1 = ((x + h) * j1(x + h) - (x - h) * j1(x - h)) / (2.0 * h);
        assert!((d1 - x * j0(x)).abs() < 1e-8 * x.max(1.0), "x = {x}");
    }
}

#[test]
fn j1_over_x_limit_and_consistency() {
    assert_eq!(j1_over_x(0.0), 0.5);
    for x in [1e-10, 1e-4, 0.3, 2.5, 17.0, 60.0] {
        assert!((j1_over_x(x) - j1(x) / x).abs() <= 1e-14, "x = {x}");
    }
}

#[test]
fn checked_entry_points_reject_non_finite() {
    assert!(bessel_j0(f64::NAN).is_err());
    assert!(bessel_j1(f64::INFINITY).is_err());
    assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
}
