use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use whittaker_core::rootdata::{is_regular, weyl_act, weyl_enumerate, DEFAULT_REGULARITY_TOL};
use whittaker_core::series::*;
use whittaker_core::specfun::{bessel_k, gamma};
use whittaker_core::{Error, RadialPoint, SpectralParameter};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sp(v: &[(f64, f64)]) -> SpectralParameter {
    SpectralParameter::new(v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
}

fn pt(y: &[f64]) -> RadialPoint {
    RadialPoint::new(y.to_vec()).unwrap()
}

#[test]
fn rank_one_is_bessel() {
    let cfg = SeriesConfig::default();
    for &(nu, y) in &[((0.3, 0.4), 1.0), ((0.12, -0.7), 0.4), ((-0.2, 1.5), 2.0)] {
        let w = w_tilde_series(&sp(&[nu]), &pt(&[y]), &cfg).unwrap();
        let k = 2.0 * bessel_k(2.0 * c(nu.0, nu.1), c(2.0 * PI * y, 0.0)).unwrap();
        assert!((w.value - k).norm() <= 1e-10 * k.norm(), "{} vs {}", w.value, k);
    }
}

#[test]
fn rank_two_reference() {
    let nu = sp(&[(0.3, 0.4), (0.15, -0.1)]);
    let w = w_tilde_series(&nu, &pt(&[1.0, 1.0]), &SeriesConfig::default()).unwrap();
    let expect = c(8.7022799185383822879e-11, 7.6765677162883710783e-12);
    assert!((w.value - expect).norm() <= 1e-10 * expect.norm(), "{:?}", w);
}

#[test]
fn rank_two_fundamental_series_reference() {
    // 40-digit graded summation
    let nu = sp(&[(0.3, 0.2), (0.1, -0.1)]);
    let m = m_tilde(&nu, &pt(&[1.0, 1.0]), 1e-14).unwrap();
    let expect = c(3650789.962918223863033083, -74164.58001914707229097083);
    assert!((m.value - expect).norm() <= 1e-11 * expect.norm(), "{:?}", m);
}

#[test]
fn rank_one_fundamental_series_is_hypergeometric() {
    let (nu, y) = (c(0.21, -0.35), 0.8);
    let m = m_tilde(&sp(&[(nu.re, nu.im)]), &pt(&[y]), 1e-15).unwrap();
    let x = (PI * y).powi(2);
    let mut term = c(1.0, 0.0);
    let mut sum = term;
    for k in 1..60 {
        term *= x / (k as f64 * (2.0 * nu + k as f64));
        sum += term;
    }
    let expect = Complex64::new(PI * y, 0.0).powc(2.0 * nu) * sum;
    assert!((m.value - expect).norm() <= 1e-13 * expect.norm());
}

#[test]
fn small_y_leading_term() {
    let nu = sp(&[(0.3, 0.2), (0.1, -0.1)]);
    let mut prev = f64::INFINITY;
    for y in [1e-1, 1e-2, 1e-3] {
        let full = m_tilde(&nu, &pt(&[y, y]), 1e-15).unwrap().value;
        let lead = m_tilde_at_order(&nu, &pt(&[y, y]), 0).unwrap().value;
        let r = ((full - lead) / full).norm();
        assert!(r < prev);
        prev = r;
    }
    assert!(prev < 1e-4);
}

#[test]
fn rank_three_reference_values() {
    // 40- and 75-digit Weyl sums
    let nu = sp(&[(0.21, 0.33), (-0.12, 0.41), (0.07, -0.25)]);
    let w = w_tilde_series(&nu, &pt(&[0.5, 0.5, 0.5]), &SeriesConfig::default()).unwrap();
    let expect = c(1.83417584278096698141831e-10, 9.740062765616329763268269e-13);
    assert!((w.value - expect).norm() <= 1e-9 * expect.norm(), "{w:?}");
    let w = w_tilde_series(&nu, &pt(&[1.0, 1.0, 1.0]), &SeriesConfig::default()).unwrap();
    let expect = c(1.754135274797342257275206e-22, 4.952432325997613877524464e-25);
    assert!((w.value - expect).norm() <= 1e-8 * expect.norm(), "{w:?}");
    assert_eq!(w.precision, "mp256");
    assert!(w.cancellation_ratio > CANCELLATION_WARN && !w.warnings.is_empty());
}

#[test]
fn gamma_products() {
    let z = c(0.17, 0.3);
    let g1 = gamma_n(&sp(&[(z.re, z.im)])).unwrap().to_complex();
    assert!((g1 - gamma(-2.0 * z).unwrap()).norm() < 1e-14 * g1.norm());
    let (a, b) = (c(0.3, 0.4), c(0.15, -0.1));
    let g2 = gamma_n(&sp(&[(a.re, a.im), (b.re, b.im)])).unwrap().to_complex();
    let expect = gamma(-a - b).unwrap() * gamma(-a + b).unwrap() * gamma(-2.0 * a).unwrap() * gamma(-2.0 * b).unwrap();
    assert!((g2 - expect).norm() < 1e-13 * expect.norm());
    assert!(matches!(gamma_n(&sp(&[(0.2, 0.1), (0.2, 0.1)])), Err(Error::Pole(_))));
}

#[test]
fn c_function_and_prefactor() {
    let z = c(0.17, 0.3);
    let c1 = hc_c_function(&sp(&[(z.re, z.im)])).unwrap().to_complex();
    let expect = (2.0 * 2.0 * PI).sqrt() * gamma(2.0 * z).unwrap() / gamma(2.0 * z + 0.5).unwrap();
    assert!((c1 - expect).norm() < 1e-13 * expect.norm());
    let p1 = w_from_j_prefactor(&sp(&[(z.re, z.im)])).unwrap().to_complex();
    let expect = Complex64::new(PI, 0.0).powc(-2.0 * z) * gamma(2.0 * z + 0.5).unwrap() / (2.0 * 2.0 * PI).sqrt();
    assert!((p1 - expect).norm() < 1e-13 * expect.norm());

    // 25-digit Gamma products
    let nu = sp(&[(0.23, 0.41), (-0.17, 0.08)]);
    let c2 = hc_c_function(&nu).unwrap().to_complex();
    let expect = c(-205.4875271109154664776285, 347.2847378512666637931815);
    assert!((c2 - expect).norm() < 1e-12 * expect.norm(), "{c2}");
    let p2 = w_from_j_prefactor(&nu).unwrap().to_complex();
    let expect = c(-0.004542435430868107502282047, 0.006988242658959728831173564);
    assert!((p2 - expect).norm() < 1e-12 * expect.norm(), "{p2}");

    assert!(matches!(hc_c_function(&sp(&[(0.2, 0.1), (0.2, 0.1)])), Err(Error::Pole(_))));
    let p = w_from_j_prefactor(&sp(&[(0.1, 0.0), (0.2, 0.0)])).unwrap();
    assert!(p.log_modulus.is_finite());
}

#[test]
fn jacquet_gamma_base_cases() {
    let nu = sp(&[(0.3, 0.1), (0.1, -0.2)]);
    let eta = default_eta(2);
    assert_eq!(jacquet_gamma(&[], &nu, &eta).unwrap(), GammaFactor::ONE);
    let z = c(0.13, 0.27);
    let g = jacquet_gamma(&[1], &sp(&[(z.re, z.im)]), &default_eta(1)).unwrap().to_complex();
    let expect = Complex64::new(PI, 0.0).powc(4.0 * z) * gamma(-2.0 * z + 0.5).unwrap() / gamma(2.0 * z + 0.5).unwrap();
    assert!((g - expect).norm() < 1e-13 * expect.norm());
}

#[test]
fn rho_shift_scaling() {
    let nu = sp(&[(0.3, 0.4), (0.15, -0.1)]);
    let cfg = SeriesConfig::default();
    let w = w_tilde_series(&nu, &pt(&[1.0, 1.0]), &cfg).unwrap().value;
    assert!((w_full(&nu, &pt(&[1.0, 1.0]), &cfg).unwrap() - w).norm() < 1e-15 * w.norm());
    let w2 = w_tilde_series(&nu, &pt(&[2.0, 1.0]), &cfg).unwrap().value;
    let full = w_full(&nu, &pt(&[2.0, 1.0]), &cfg).unwrap();
    assert!((full - w2 * 2f64.powf(1.5)).norm() < 1e-14 * full.norm());
}

#[test]
fn forced_precision_tiers() {
    let nu = sp(&[(0.3, 0.4), (0.15, -0.1)]);
    let y = pt(&[1.0, 1.0]);
    let dd = w_tilde_series(&nu, &y, &SeriesConfig { precision: Precision::DoubleDouble, ..SeriesConfig::default() }).unwrap();
    let mp = w_tilde_series(&nu, &y, &SeriesConfig { precision: Precision::Wide, ..SeriesConfig::default() }).unwrap();
    assert_eq!((dd.precision, mp.precision), ("double-double", "mp256"));
    assert!((dd.value - mp.value).norm() < 1e-10 * mp.value.norm());
}

#[test]
fn cached_engine_matches_uncached() {
    let nu = [c(0.3, 0.4), c(0.15, -0.1)];
    let cached = SeriesEngine::new(SeriesConfig::default());
    let plain = SeriesEngine::uncached(SeriesConfig::default());
    for y in [[0.9, 1.1], [0.9, 1.1], [1.2, 0.8]] {
        assert_eq!(cached.w_tilde(&nu, &y).unwrap().value, plain.w_tilde(&nu, &y).unwrap().value);
    }
}

#[test]
fn printed_simple_factor_breaks_the_braid_relation() {
    // the simple factor written with ν_i + ν_{i+1} in place of ν_i − ν_{i+1}
    // is not a cocycle: the two reduced words of w_0 in W_2 disagree
    let nu = [c(0.23, 0.41), c(-0.17, 0.08)];
    let simple = |i: usize, v: &[Complex64]| -> Complex64 {
        if i == 1 {
            let d = v[0] + v[1];
            Complex64::new(PI, 0.0).powc(2.0 * d) * gamma(-d + 0.5).unwrap() / gamma(d + 0.5).unwrap()
        } else {
            let s = v[1];
            Complex64::new(PI, 0.0).powc(4.0 * s) * gamma(-2.0 * s + 0.5).unwrap() / gamma(2.0 * s + 0.5).unwrap()
        }
    };
    let act = |i: usize, v: &[Complex64]| -> Vec<Complex64> {
        if i == 1 { vec![v[1], v[0]] } else { vec![v[0], -v[1]] }
    };
    let along = |word: &[usize]| -> Complex64 {
        let mut v = nu.to_vec();
        let mut g = c(1.0, 0.0);
        for &i in word.iter().rev() {
            g *= simple(i, &v);
            v = act(i, &v);
        }
        g
    };
    let (a, b) = (along(&[1, 2, 1, 2]), along(&[2, 1, 2, 1]));
    assert!((a - b).norm() > 1e-3 * a.norm());
    let nu = SpectralParameter::new(nu.to_vec()).unwrap();
    let eta = default_eta(2);
    let (a, b) = (jacquet_gamma(&[1, 2, 1, 2], &nu, &eta).unwrap(), jacquet_gamma(&[2, 1, 2, 1], &nu, &eta).unwrap());
    assert!((a.to_complex() - b.to_complex()).norm() < 1e-12 * a.to_complex().norm());
}

fn nu_strategy(n: usize, re: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-re..re, -1.0..1.0f64), n)
}

fn regular(v: &[(f64, f64)]) -> bool {
    is_regular(&sp(v), 8, DEFAULT_REGULARITY_TOL).map(|r| r.regular).unwrap_or(false)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weyl_invariance_rank_two(v in nu_strategy(2, 0.2), y1 in 0.8..1.2f64, y2 in 0.8..1.2f64, k in 0usize..8) {
        prop_assume!(regular(&v));
        let nu = sp(&v);
        let w = &weyl_enumerate(2).unwrap()[k];
        let cfg = SeriesConfig::default();
        let a = w_tilde_series(&nu, &pt(&[y1, y2]), &cfg).unwrap().value;
        let b = w_tilde_series(&weyl_act(w, &nu), &pt(&[y1, y2]), &cfg).unwrap().value;
        prop_assert!((a - b).norm() <= 1e-8 * a.norm());
    }

    #[test]
    fn tail_bound_shrinks_with_order(v in nu_strategy(2, 0.45), y1 in 0.3..1.5f64, y2 in 0.3..1.5f64) {
        prop_assume!(regular(&v));
        let (nu, y) = (sp(&v), pt(&[y1, y2]));
        let mut prev = f64::INFINITY;
        for order in (4..40).step_by(2) {
            let t = m_tilde_at_order(&nu, &y, order).unwrap().tail_bound;
            prop_assert!(t <= prev, "order {order}: {t} > {prev}");
            prev = t;
        }
    }

    #[test]
    fn generator_squares_are_trivial(v in nu_strategy(3, 0.45), i in 1usize..=3) {
        prop_assume!(regular(&v));
        let g = jacquet_gamma(&[i, i], &sp(&v), &default_eta(3)).unwrap();
        prop_assert!(g.to_complex().norm() > 0.0);
        prop_assert!((g.to_complex() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn commuting_generators_commute(v in nu_strategy(3, 0.45)) {
        prop_assume!(regular(&v));
        let (nu, eta) = (sp(&v), default_eta(3));
        let a = jacquet_gamma(&[1, 3], &nu, &eta).unwrap().to_complex();
        let b = jacquet_gamma(&[3, 1], &nu, &eta).unwrap().to_complex();
        prop_assert!((a - b).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn braid_words_agree(v in nu_strategy(3, 0.45)) {
        prop_assume!(regular(&v));
        let (nu, eta) = (sp(&v), default_eta(3));
        for (p, q) in [(vec![1, 2, 1], vec![2, 1, 2]), (vec![2, 3, 2, 3], vec![3, 2, 3, 2])] {
            let a = jacquet_gamma(&p, &nu, &eta).unwrap().to_complex();
            let b = jacquet_gamma(&q, &nu, &eta).unwrap().to_complex();
            prop_assert!((a - b).norm() < 1e-10 * a.norm());
        }
    }
}
