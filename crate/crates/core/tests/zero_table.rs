//! Checks the bundled table of zero ordinates against independent evaluations.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use zetalab::zeros::{count_zeros, load_zero_table, local_minimum, validate_ordinates, ZeroTable};
use zetalab::zeta_eval::zeta_point;

fn table() -> ZeroTable {
    load_zero_table(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/zeta_zeros_1e4.txt")).unwrap()
}

/// Main term of the zero-counting function, `θ(T)/π + 1`.
fn smooth_count(t: f64) -> f64 {
    let theta = 0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0 + 1.0 / (48.0 * t);
    theta / PI + 1.0
}

#[test]
fn table_covers_the_range() {
    let z = table();
    assert_eq!(z.len(), 10142);
    assert!((z.ordinates()[0] - 14.134_725_141_734_693).abs() < 1e-11);
    assert!(*z.ordinates().last().unwrap() <= 1e4);
    assert_eq!(count_zeros(&z, 1e3), 649);
}

#[test]
fn counts_follow_the_smooth_main_term() {
    // S(T) = N(T) - θ(T)/π - 1 stays small and averages to zero; a missing
    // or duplicated zero would shift it by one over a long stretch.
    let z = table();
    let mut sum = 0.0;
    let samples = 20_000;
    for i in 0..samples {
        let t = 100.0 + (1e4 - 100.0) * (i as f64 + 0.5) / samples as f64;
        let s = count_zeros(&z, t) as f64 - smooth_count(t);
        assert!(s.abs() < 3.0, "S({t}) = {s}");
        sum += s;
    }
    let mean = sum / samples as f64;
    assert!(mean.abs() < 0.1, "mean of S = {mean}");
}

#[test]
fn low_ordinates_are_minima_of_the_modulus() {
    let bad = validate_ordinates(&table(), 1e3, 0.05, 1e-3).unwrap();
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn high_ordinates_are_zeros() {
    let z = table();
    for &g in &z.ordinates()[z.len() - 25..] {
        let m = local_minimum(g, 0.05).unwrap();
        assert!(m.modulus < 1e-3 && (m.t_min - g).abs() < 1e-4, "{m:?}");
        assert!(zeta_point(Complex64::new(0.5, g), 1e-12).unwrap().norm() < 1e-9, "{g}");
    }
    assert!(zeta_point(Complex64::new(0.5, z.ordinates()[0]), 1e-12).unwrap().norm() < 1e-10);
}
