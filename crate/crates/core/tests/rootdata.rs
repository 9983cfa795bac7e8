use num_complex::Complex64;
use proptest::prelude::*;
use whittaker_core::rootdata::*;
use whittaker_core::SpectralParameter;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sp(v: &[(f64, f64)]) -> SpectralParameter {
    SpectralParameter::new(v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
}

#[test]
fn generators_act_as_documented() {
    let nu = sp(&[(0.3, 0.1), (-0.2, 0.4)]);
    let wn = WeylElement::generator(2, 2).unwrap();
    assert_eq!(weyl_act(&wn, &nu).nu, vec![nu.nu[0], -nu.nu[1]]);
    let w1 = WeylElement::generator(2, 1).unwrap();
    assert_eq!(weyl_act(&w1, &nu).nu, vec![nu.nu[1], nu.nu[0]]);
    assert_eq!(weyl_act(&WeylElement::identity(2), &nu), nu);
}

#[test]
fn group_sizes() {
    for (n, size) in [(1, 2), (2, 8), (3, 48), (4, 384)] {
        assert_eq!(weyl_enumerate(n).unwrap().len(), size);
    }
}

#[test]
fn enumeration_has_no_repeats() {
    let all = weyl_enumerate(4).unwrap();
    let set: std::collections::HashSet<_> = all.iter().cloned().collect();
    assert_eq!(set.len(), all.len());
}

#[test]
fn longest_element_of_b2() {
    // (w_1 w_2)^2 = −1 on ν
    let w0 = WeylElement::from_word(2, &[1, 2, 1, 2]).unwrap();
    assert_eq!(w0, WeylElement::from_word(2, &[2, 1, 2, 1]).unwrap());
    let nu = sp(&[(0.3, 0.1), (-0.2, 0.4)]);
    assert_eq!(weyl_act(&w0, &nu).nu, vec![-nu.nu[0], -nu.nu[1]]);
}

#[test]
fn rho_exponents() {
    assert_eq!(rho_exponent(1, 1), 0.5);
    assert_eq!(rho_exponent(2, 1), 1.5);
    assert_eq!(rho_exponent(2, 2), 2.0);
    assert_eq!(rho_exponent(3, 2), 4.0);
}

#[test]
fn regularity_examples() {
    let r = is_regular(&sp(&[(0.3, 0.7), (0.1, -0.2)]), 8, DEFAULT_REGULARITY_TOL).unwrap();
    assert!(r.regular, "{r:?}");
    let r = is_regular(&sp(&[(0.3, 0.2), (0.3, 0.2)]), 8, DEFAULT_REGULARITY_TOL).unwrap();
    assert!(!r.regular);
    // 2ν_n = −1 makes q_n(e_n, ν) vanish
    let r = is_regular(&sp(&[(0.2, 0.1), (-0.5, 0.0)]), 8, DEFAULT_REGULARITY_TOL).unwrap();
    assert!(!r.regular && r.min_q < 1e-12);
}

#[test]
fn regularity_report_serializes() {
    let r = is_regular(&sp(&[(0.3, 0.7), (0.1, -0.2)]), 4, DEFAULT_REGULARITY_TOL).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["box"], 4);
    assert_eq!(v["regular"], true);
}

fn element(n: usize) -> impl Strategy<Value = WeylElement> {
    let all = weyl_enumerate(n).unwrap();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

fn nu3() -> impl Strategy<Value = SpectralParameter> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3).prop_map(|v| sp(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn action_is_a_homomorphism(a in element(3), b in element(3), nu in nu3()) {
        let lhs = weyl_act(&a.compose(&b), &nu);
        let rhs = weyl_act(&a, &weyl_act(&b, &nu));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn composition_is_associative(a in element(3), b in element(3), d in element(3)) {
        prop_assert_eq!(a.compose(&b).compose(&d), a.compose(&b.compose(&d)));
    }

    #[test]
    fn inverse_undoes_action(a in element(3), nu in nu3()) {
        prop_assert_eq!(weyl_act(&a.inverse(), &weyl_act(&a, &nu)), nu);
    }

    #[test]
    fn regularity_is_weyl_invariant(a in element(2), re in prop::collection::vec((-0.45..0.45f64, -1.0..1.0f64), 2)) {
        let nu = sp(&re);
        let r1 = is_regular(&nu, 6, DEFAULT_REGULARITY_TOL).unwrap();
        let r2 = is_regular(&weyl_act(&a, &nu), 6, DEFAULT_REGULARITY_TOL).unwrap();
        prop_assert_eq!(r1.regular, r2.regular);
        prop_assert!((r1.min_q - r2.min_q).abs() <= 1e-12 * r1.min_q.max(1.0));
    }
}
