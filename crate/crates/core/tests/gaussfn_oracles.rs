mod common;

use common::{big_phi, integrate, owens_t_quad, phi};
use proptest::prelude::*;
use riskrev_core::gaussfn::*;

fn t(h: f64, a: f64) -> f64 {
    owens_t(TParams::new(h, a).unwrap())
}

fn params(m: f64, a: f64, b: f64) -> IntegralParams {
    IntegralParams::new(m, a, b).unwrap()
}

fn quad_phi_cdf(m: f64, a: f64, b: f64) -> f64 {
    integrate(|z| phi(z) * big_phi(a + b * z), 0.0, m)
}

fn quad_z_phi_phi(m: f64, a: f64, b: f64) -> f64 {
    integrate(|z| z * phi(z) * phi(a + b * z), 0.0, m)
}

#[test]
fn quadrature_oracle_sanity() {
    assert!((big_phi(1.0) - 0.8413447460685429).abs() < 1e-13);
    assert!((owens_t_quad(0.0, 1.0) - 0.125).abs() < 1e-13);
    assert!((owens_t_quad(1.0, f64::INFINITY) - 0.5 * (1.0 - 0.8413447460685429)).abs() < 1e-13);
}

#[test]
fn cdf_matches_quadrature() {
    // the tanh-sinh oracle itself is good to about 1e-14
    for i in -80..=80 {
        let x = i as f64 * 0.1;
        assert!((std_normal_cdf(x).unwrap() - big_phi(x)).abs() < 1e-13, "x={x}");
    }
}

#[test]
fn owens_t_identities() {
    let hs = [-4.0, -1.3, -0.2, 0.0, 0.5, 1.0, 2.0, 2.7, 6.0, 12.0];
    for &h in &hs {
        assert_eq!(t(h, 0.0), 0.0);
        let inf = t(h, f64::INFINITY);
        assert!((inf - 0.5 * std_normal_cdf(-h.abs()).unwrap()).abs() < IDENTITY_TOL, "h={h}");
        for &a in &[0.1, 0.9, 1.0, 1.7, 25.0] {
            assert_eq!(t(h, -a), -t(h, a));
            assert_eq!(t(-h, a), t(h, a));
        }
    }
    for &a in &[0.01, 0.5, 1.0, 3.0, 1e3] {
        assert!((t(0.0, a) - a.atan() / (2.0 * std::f64::consts::PI)).abs() < IDENTITY_TOL);
    }
}

#[test]
fn owens_t_grid_against_quadrature() {
    let mut worst = 0.0f64;
    for i in 0..=40 {
        let h = -5.0 + 0.25 * i as f64;
        for j in 0..=40 {
            let a = -5.0 + 0.25 * j as f64;
            let err = (t(h, a) - owens_t_quad(h, a)).abs();
            worst = worst.max(err);
        }
    }
    assert!(worst <= IDENTITY_TOL, "worst error {worst:e}");
}

#[test]
fn owens_t_far_quadrant_against_quadrature() {
    for &h in &[0.01, 0.3, 1.9, 2.1, 4.0, 8.0] {
        for &a in &[1e-3, 0.99, 1.01, 10.0, 200.0, f64::INFINITY] {
            let err = (t(h, a) - owens_t_quad(h, a)).abs();
            assert!(err <= IDENTITY_TOL, "h={h} a={a}: {err:e}");
        }
    }
}

#[test]
fn prop_a1_examples() {
    let v = int_phi_cdf(params(1.0, 0.3, 0.7));
    assert!((v - quad_phi_cdf(1.0, 0.3, 0.7)).abs() < QUADRATURE_TOL);
    let v = int_phi_cdf_linear(1.5, 2.0).unwrap();
    assert!((v - quad_phi_cdf(1.5, 0.0, 2.0)).abs() < IDENTITY_TOL);
    let v = int_z_phi_phi(params(2.0, 0.5, 1.2));
    assert!((v - quad_z_phi_phi(2.0, 0.5, 1.2)).abs() < IDENTITY_TOL);
    let v = int_z_phi_phi(params(1.0, 0.0, 0.0));
    let phi0 = phi(0.0);
    assert!((v - phi0 * (phi0 - phi(1.0))).abs() < IDENTITY_TOL);
    assert!((v - quad_z_phi_phi(1.0, 0.0, 0.0)).abs() < IDENTITY_TOL);
}

#[test]
fn linear_integral_equals_stated_combination() {
    for &(m, b) in &[(0.3, -2.0), (1.5, 2.0), (4.0, 0.6), (2.2, -0.1)] {
        let stated = 0.5 * std_normal_cdf(m).unwrap() - 0.25 - t(m, b)
            + f64::atan(b) / (2.0 * std::f64::consts::PI);
        assert!((int_phi_cdf_linear(m, b).unwrap() - stated).abs() < IDENTITY_TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn owens_t_random_against_quadrature(h in -5.0f64..5.0, a in -5.0f64..5.0) {
        let err = (t(h, a) - owens_t_quad(h, a)).abs();
        prop_assert!(err <= QUADRATURE_TOL, "h={} a={} err={:e}", h, a, err);
    }

    #[test]
    fn int_phi_cdf_random_against_quadrature(m in 0.0f64..3.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let err = (int_phi_cdf(params(m, a, b)) - quad_phi_cdf(m, a, b)).abs();
        prop_assert!(err <= 1e-9, "m={} a={} b={} err={:e}", m, a, b, err);
    }

    #[test]
    fn int_z_phi_phi_random_against_quadrature(m in 0.0f64..3.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let err = (int_z_phi_phi(params(m, a, b)) - quad_z_phi_phi(m, a, b)).abs();
        prop_assert!(err <= 1e-9, "m={} a={} b={} err={:e}", m, a, b, err);
    }

    #[test]
    fn small_shift_limit(m in 0.01f64..3.0, b in -3.0f64..3.0, a in -1e-12f64..1e-12) {
        let lin = int_phi_cdf_linear(m, b).unwrap();
        prop_assert!((int_phi_cdf(params(m, a, b)) - lin).abs() <= QUADRATURE_TOL);
    }

    #[test]
    fn cdf_is_monotone(x in -9.0f64..9.0, dx in 0.0f64..1.0) {
        prop_assert!(std_normal_cdf(x + dx).unwrap() >= std_normal_cdf(x).unwrap());
    }
}
