use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use whittaker_core::specfun::*;
use whittaker_core::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn gamma_reference_value() {
    // 30-digit mpmath value
    let expect = c(0.491656339018351037341011262632, 0.752825933485097021176465875258);
    assert!(rel(gamma(c(2.5, 1.3)).unwrap(), expect) < 1e-13);
}

#[test]
fn pochhammer_small_cases() {
    let a = c(0.37, -1.2);
    assert_eq!(pochhammer(a, 0).unwrap(), c(1.0, 0.0));
    assert_eq!(pochhammer(c(1.0, 0.0), 5).unwrap(), c(120.0, 0.0));
    // (a)_{−3} = −1/(1−a)_3
    let direct = -1.0 / ((1.0 - a) * (2.0 - a) * (3.0 - a));
    assert!(rel(pochhammer(a, -3).unwrap(), direct) < 1e-15);
}

#[test]
fn pochhammer_long_products_switch_to_log_gamma() {
    let a = c(0.25, 0.5);
    let mut p = c(1.0, 0.0);
    for j in 0..80 {
        p *= a + j as f64;
    }
    assert!(rel(pochhammer(a, 80).unwrap(), p) < 1e-11);
}

#[test]
fn bessel_reference_values() {
    let k1 = bessel_k(c(0.3, 0.2), c(2.0, 0.0)).unwrap();
    assert!(rel(k1, c(0.115047653878057743177666688421, 0.00285990603677813936760932819183)) < 1e-12);
    let k2 = bessel_k(c(0.4, -0.7), c(0.75, 0.0)).unwrap();
    assert!(rel(k2, c(0.509360642002904848016260006878, -0.135908318437690286915375819378)) < 1e-12);
}

#[test]
fn bessel_rejects_left_half_plane() {
    assert!(bessel_k(c(0.2, 0.0), c(-1.0, 0.0)).is_err());
}

#[test]
fn gauss_summation_cases() {
    assert!(rel(gauss_2f1_unit(c(0.0, 0.0), c(0.4, 0.3), c(2.2, -0.1)).unwrap(), c(1.0, 0.0)) < 1e-14);
    // a = −3 terminates after four terms
    let (a, b, cc) = (c(-3.0, 0.0), c(0.7, 0.2), c(1.9, 0.4));
    let d = gauss_2f1_series(a, b, cc, 100).unwrap();
    assert!(d.terminating && d.terms == 4);
    let mut term = c(1.0, 0.0);
    let mut sum = term;
    for k in 0..3 {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((cc + kf) * (kf + 1.0));
        sum += term;
    }
    assert!(rel(d.ratio_value, sum) < 1e-13);
    // Re(c − a − b) = 1.7
    let d = gauss_2f1_series(c(0.3, 0.4), c(-0.2, 0.1), c(1.8, 0.5), 200_000).unwrap();
    assert!(d.relative_discrepancy < 1e-9, "{d:?}");
}

#[test]
fn gauss_divergent_series_is_an_error() {
    let r = gauss_2f1_series(c(0.5, 0.0), c(0.5, 0.0), c(0.9, 0.0), 100);
    assert!(matches!(r, Err(Error::DivergentSeries(_))));
}

fn off_pole() -> impl Strategy<Value = Complex64> {
    (-20.0..20.0f64, -20.0..20.0f64)
        .prop_map(|(a, b)| c(a, b))
        .prop_filter("away from poles", |z| pole_distance(*z) > 1e-3 && pole_distance(*z + 1.0) > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gamma_recurrence(z in off_pole()) {
        let lhs = gamma(z + 1.0).unwrap();
        let rhs = z * gamma(z).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-12, "{z}: {lhs} vs {rhs}");
    }

    #[test]
    fn log_gamma_recurrence_in_log_space(z in off_pole()) {
        let a = log_gamma(z + 1.0).unwrap();
        let b = log_gamma(z).unwrap();
        let d = Complex64::from_polar(1.0, a.phase - b.phase) * (a.log_modulus - b.log_modulus).exp();
        prop_assert!(rel(d, z) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_reflection(a in -6.0..6.0f64, b in -3.0..3.0f64) {
        let z = c(a, b);
        prop_assume!(pole_distance(z) > 1e-3 && pole_distance(1.0 - z) > 1e-3);
        let v = gamma(z).unwrap() * gamma(1.0 - z).unwrap() * (PI * z).sin() / PI;
        prop_assert!((v - 1.0).norm() < 1e-11, "{z}: {v}");
    }

    #[test]
    fn bessel_symmetric_in_order(a in -1.5..1.5f64, b in -3.0..3.0f64, x in 0.1..30.0f64) {
        let k1 = bessel_k(c(a, b), c(x, 0.0)).unwrap();
        let k2 = bessel_k(c(-a, -b), c(x, 0.0)).unwrap();
        prop_assert_eq!(k1, k2);
    }

    #[test]
    fn bessel_three_term_recurrence(a in -1.0..1.0f64, b in -2.0..2.0f64, x in 0.2..20.0f64) {
        // K_{s+1} − K_{s−1} = (2s/z) K_s
        let (s, z) = (c(a, b), c(x, 0.0));
        let lhs = bessel_k(s + 1.0, z).unwrap() - bessel_k(s - 1.0, z).unwrap();
        let rhs = 2.0 * s / z * bessel_k(s, z).unwrap();
        let scale = bessel_k(s + 1.0, z).unwrap().norm();
        prop_assert!((lhs - rhs).norm() < 1e-10 * scale);
    }

    #[test]
    fn pochhammer_reflection(a in -5.0..5.0f64, b in 0.05..3.0f64, k in 1..20i64) {
        let a = c(a, b);
        let p = pochhammer(a, -k).unwrap();
        let back = pochhammer(a - k as f64, k).unwrap();
        prop_assert!((p * back - 1.0).norm() < 1e-12);
    }
}
