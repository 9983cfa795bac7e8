use num_complex::Complex64;
use proptest::prelude::*;
use whittaker_core::coefficients::*;
use whittaker_core::SpectralParameter;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sp(v: &[(f64, f64)]) -> SpectralParameter {
    SpectralParameter::new(v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn q_form_small_cases() {
    let nu = [c(0.3, 0.2), c(0.1, -0.1)];
    assert_eq!(q_form(&MultiIndex::zero(2), &nu), c(0.0, 0.0));
    assert!((q_form(&MultiIndex(vec![1, 0]), &nu) - (1.0 + nu[0] - nu[1])).norm() < 1e-15);
    assert!((q_form(&MultiIndex(vec![0, 1]), &nu) - (0.5 + nu[1])).norm() < 1e-15);
}

#[test]
fn one_step_unrolling() {
    let nu = sp(&[(0.3, 0.2), (0.1, -0.1)]);
    let t = coeffs_recurrence(&nu, 2).unwrap();
    assert_eq!(t.get(&[0, 0]).unwrap(), c(1.0, 0.0));
    let n = &nu.nu;
    assert!((t.get(&[0, 1]).unwrap() - 1.0 / (1.0 + 2.0 * n[1])).norm() < 1e-15);
    assert!((t.get(&[1, 0]).unwrap() - 1.0 / (1.0 + n[0] - n[1])).norm() < 1e-15);
}

#[test]
fn rank_one_closed_form() {
    let nu = sp(&[(0.17, -0.4)]);
    let v = coeffs_closed_form(&nu, &MultiIndex(vec![3])).unwrap();
    let a = 2.0 * nu.nu[0] + 1.0;
    let expect = 1.0 / (6.0 * a * (a + 1.0) * (a + 2.0));
    assert!(rel(v, expect) < 1e-15);
}

#[test]
fn recurrence_matches_high_precision_values() {
    // 40-digit recurrence evaluations
    let nu = sp(&[(0.3, 0.2), (0.1, -0.1)]);
    let t = coeffs_recurrence(&nu, 4).unwrap();
    assert!(rel(t.get(&[3, 2]).unwrap(), c(0.05534678408844335917, -0.03243331401666463136)) < 1e-14);
    assert!(rel(t.get(&[4, 4]).unwrap(), c(0.0004222300911142741314, -0.0003296904652409900533)) < 1e-14);

    let nu3 = sp(&[(0.21, 0.33), (-0.12, 0.41), (0.07, -0.25)]);
    let t3 = coeffs_recurrence(&nu3, 3).unwrap();
    assert!(rel(t3.get(&[2, 1, 3]).unwrap(), c(0.1070170757731991095, -0.1244016236677253585)) < 1e-14);
    let cf = coeffs_closed_form(&nu3, &MultiIndex(vec![2, 1, 3])).unwrap();
    assert!(rel(cf, c(0.1070170757731991095, -0.1244016236677253585)) < 1e-13);
}

#[test]
fn closed_form_matches_recurrence_n2() {
    let nu = sp(&[(0.27, -0.61), (-0.08, 0.35)]);
    let rec = coeffs_recurrence(&nu, 3).unwrap();
    let cf = coeffs_closed_form(&nu, &MultiIndex(vec![2, 1])).unwrap();
    assert!(rel(cf, rec.get(&[2, 1]).unwrap()) < 1e-13);
}

#[test]
fn flat_sum_agrees_with_b_table_route() {
    let nu = sp(&[(0.27, -0.61), (-0.08, 0.35)]);
    let table = closed_form_table(&nu, 4).unwrap();
    for (m, v) in table.entries() {
        let flat = coeffs_closed_form_flat(&nu, &MultiIndex(m.clone())).unwrap();
        assert!((flat - v).norm() <= 1e-12 * v.norm().max(1e-300), "{m:?}");
    }
    let nu3 = sp(&[(0.11, 0.2), (-0.3, 0.05), (0.2, -0.4)]);
    let table3 = closed_form_table(&nu3, 2).unwrap();
    for (m, v) in table3.entries() {
        let flat = coeffs_closed_form_flat(&nu3, &MultiIndex(m.clone())).unwrap();
        assert!((flat - v).norm() <= 1e-12 * v.norm(), "{m:?}");
    }
}

#[test]
fn b_recurrence_trivial_box() {
    let nu = sp(&[(0.27, -0.61), (-0.08, 0.35)]);
    let r = b_recurrence_check(&nu, 0).unwrap();
    assert_eq!(r.max_residual, 0.0);
}

#[test]
fn b_table_vanishes_below_diagonal() {
    let nu = sp(&[(0.2, 0.1), (-0.1, 0.3), (0.05, -0.2)]);
    let lower = closed_form_table(&nu.truncated(), 3).unwrap();
    let bt = build_b_table(&nu, 3, &lower).unwrap();
    assert_eq!(bt.get(&[3, 1, 2]).unwrap(), c(0.0, 0.0));
    assert_ne!(bt.get(&[3, 2, 1]).unwrap(), c(0.0, 0.0));
    // b_0 = c_{n-1,0} = 1
    assert_eq!(bt.get(&[0, 0, 0]).unwrap(), c(1.0, 0.0));
}

#[test]
fn singular_coefficient_guard() {
    // 2ν_2 = −1 makes q(e_2) = 1/2 + ν_2 vanish
    let nu = sp(&[(0.3, 0.0), (-0.5, 0.0)]);
    match coeffs_recurrence(&nu, 2) {
        Err(whittaker_core::Error::SingularCoefficient { m, .. }) => assert_eq!(m, vec![0, 1]),
        other => panic!("expected SingularCoefficient, got {other:?}"),
    }
}

#[test]
fn table_json_round_trip() {
    let nu = sp(&[(0.3, 0.2), (0.1, -0.1)]);
    let t = coeffs_recurrence(&nu, 3).unwrap();
    let s = serde_json::to_string(&t.to_json()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["box"], 3);
    assert_eq!(v["entries"][0]["m"], serde_json::json!([0, 0]));
    assert_eq!(v["entries"][0]["re"], 1.0);
    let back = CoefficientTable::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
    for (m, val) in t.entries() {
        assert_eq!(back.get(&m).unwrap(), val);
    }
}

fn nu_strategy(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-0.4f64..0.4, -1.0f64..1.0), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_form_equals_recurrence(v2 in nu_strategy(2), v3 in nu_strategy(3)) {
        for v in [v2, v3] {
            let nu = sp(&v);
            let (Ok(rec), Ok(cf)) = (coeffs_recurrence(&nu, 4), closed_form_table(&nu, 4)) else {
                continue;
            };
            for (m, r) in rec.entries() {
                let x = cf.get(&m).unwrap();
                prop_assert!((x - r).norm() <= 1e-9 * r.norm().max(1.0), "{:?}: {} vs {}", m, x, r);
            }
        }
    }

    #[test]
    fn b_recurrence_residual_is_small(v in nu_strategy(3)) {
        let nu = sp(&v);
        if let Ok(r) = b_recurrence_check(&nu, 4) {
            prop_assert!(r.max_residual <= 1e-10 * r.max_abs_b);
        }
    }
}
