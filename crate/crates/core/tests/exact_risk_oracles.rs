mod common;

use std::f64::consts::PI;

use common::{integrate, phi, rng, uniform};
use riskrev_core::exact_risk::*;
use riskrev_core::geometry::{project_triangle_example, ExampleGeometry, RegionLabel};
use riskrev_core::montecarlo::{estimate, estimate_many, mc_risk, McConfig};

fn geo(c: f64) -> ExampleGeometry {
    ExampleGeometry::new(c).unwrap()
}

#[test]
fn breakdown_sums_to_single_expression() {
    let mut r = rng(100);
    for _ in 0..200 {
        let c = uniform(&mut r, 0.1, 5.0);
        let sigma = 10f64.powf(uniform(&mut r, -2.0, 2.0));
        let g = geo(c);
        let b = risk_triangle_exact(&g, sigma).unwrap();
        let closed = risk_triangle_closed_form(&g, sigma).unwrap();
        assert!((b.total() - closed).abs() <= 1e-12, "c={c} σ={sigma}: {} vs {closed}", b.total());
        let sum: f64 = b.iter().map(|(_, v)| v).sum();
        assert!((sum - b.total()).abs() <= 1e-12);
        for (label, v) in b.iter() {
            assert!(v >= -1e-12, "{label:?} = {v}");
        }
    }
}

#[test]
fn region_terms_match_monte_carlo() {
    for &(c, sigma) in &[(0.5, 10.0), (1.0, 1.0), (2.0, 0.3), (0.2, 5.0)] {
        let g = geo(c);
        let exact = risk_triangle_exact(&g, sigma).unwrap();
        let cfg = McConfig::new(1_000_000, 31).unwrap();
        let est = estimate_many(&cfg, 7, |s, _, out| {
            let y = [sigma * s.normal(), sigma * s.normal()];
            let (q, label) = project_triangle_example(&g, &y).unwrap();
            out.iter_mut().for_each(|v| *v = 0.0);
            out[label.index()] = q[0] * q[0] + q[1] * q[1];
            Ok(())
        })
        .unwrap();
        for label in RegionLabel::ALL {
            let e = est[label.index()];
            let want = exact.get(label);
            assert!(
                (e.mean - want).abs() <= 4.0 * e.stderr + 1e-12,
                "c={c} σ={sigma} {label:?}: mc {} ± {} vs {want}",
                e.mean,
                e.stderr
            );
        }
    }
}

/// `σ² ∫∫_{Θ_L} ‖z‖² φ(z1) φ(z2) dz` over `Θ_L/σ`, by nested quadrature.
fn interior_quadrature(c: f64, sigma: f64) -> f64 {
    let top = 1.0 / sigma;
    let inner = |z1: f64| integrate(|z2| (z1 * z1 + z2 * z2) * phi(z1) * phi(z2), c * z1, top);
    sigma * sigma * integrate(inner, 0.0, top / c)
}

#[test]
fn interior_term_matches_quadrature() {
    for &(c, sigma) in &[(0.5, 2.0), (1.0, 1.0), (3.0, 0.5), (0.7, 0.2)] {
        let want = interior_quadrature(c, sigma);
        let got = risk_triangle_exact(&geo(c), sigma).unwrap().get(RegionLabel::Interior);
        assert!((got - want).abs() <= 1e-10, "c={c} σ={sigma}: {got} vs {want}");
    }
}

#[test]
fn segment_risk_matches_monte_carlo_for_interior_t() {
    for &(c, t, sigma) in &[(1.0, 0.3, 1.0), (0.5, 0.5, 2.0), (2.0, 1.0, 0.4), (0.8, 0.9, 5.0)] {
        let g = geo(c);
        let v2 = g.v2();
        let theta = [t * v2[0], t * v2[1]];
        let cfg = McConfig::new(500_000, 9).unwrap();
        let est = estimate(&cfg, |s, _| {
            let y = [theta[0] + sigma * s.normal(), theta[1] + sigma * s.normal()];
            let q = riskrev_core::geometry::project_segment(&g.v1(), &v2, &y).unwrap();
            Ok((q[0] - theta[0]).powi(2) + (q[1] - theta[1]).powi(2))
        })
        .unwrap();
        let exact = risk_segment_exact(&g, t, sigma).unwrap();
        assert!(est.agrees_with(exact, 4.0, 0.0), "c={c} t={t} σ={sigma}: {est:?} vs {exact}");
    }
}

#[test]
fn exact_risks_match_mc_risk_on_grid() {
    let mut failures = Vec::new();
    for &c in &[0.2, 0.5, 1.0, 2.0, 5.0] {
        let g = geo(c);
        for &sigma in &[0.1, 1.0, 5.0, 20.0, 100.0] {
            let q = RiskQuery::new(vec![0.0, 0.0], sigma).unwrap();
            let cfg = McConfig::new(200_000, 2024).unwrap();
            let s = mc_risk(&g.segment(), &q, &cfg).unwrap();
            let l = mc_risk(&g.triangle(), &q, &cfg).unwrap();
            let es = risk_segment_exact(&g, 0.0, sigma).unwrap();
            let el = risk_triangle_exact(&g, sigma).unwrap().total();
            if !s.agrees_with(es, 4.0, 0.0) || !l.agrees_with(el, 4.0, 0.0) {
                failures.push((c, sigma, s.mean, es, l.mean, el));
            }
        }
    }
    assert!(failures.len() <= 1, "{failures:?}");
}

#[test]
fn small_noise_limits() {
    for &c in &[0.2, 0.5, 1.0, 2.0, 5.0] {
        let g = geo(c);
        let s = 1e-3;
        let seg = risk_segment_exact(&g, 0.0, s).unwrap() / (s * s);
        assert!((seg - 0.5).abs() / 0.5 <= 0.01);
        let want = 0.5 + (1.0 / c).atan() / PI;
        let tri = risk_triangle_exact(&g, s).unwrap().total() / (s * s);
        assert!((tri - want).abs() / want <= 0.01, "c={c}: {tri} vs {want}");
        let diff = risk_difference(&g, s).unwrap() / (s * s);
        let coeff = small_noise_diff_coeff(c).unwrap();
        assert!((diff - coeff).abs() / coeff.abs() <= 0.02);
    }
}

#[test]
fn large_noise_limits() {
    for &c in &[0.5, 1.0, 2.0, 5.0] {
        let g = geo(c);
        let alpha = g.alpha();
        let s = 1e4;
        let seg = risk_segment_exact(&g, 0.0, s).unwrap();
        assert!((seg - alpha / 2.0).abs() <= 1e-3);
        let want = alpha * (0.25 + (1.0 / c).atan() / (2.0 * PI)) + 0.25;
        let tri = risk_triangle_exact(&g, s).unwrap().total();
        assert!((tri - want).abs() <= 1e-3, "c={c}: {tri} vs {want}");
        let diff = risk_difference(&g, s).unwrap();
        assert!((diff - large_noise_limit_diff(c).unwrap()).abs() <= 1e-3);
    }
}

#[test]
fn limit_difference_is_the_difference_of_limits() {
    for &c in &[0.3, 1.0, 4.0] {
        let g = geo(c);
        let alpha = g.alpha();
        let limit_l = alpha * (0.25 + (1.0 / c).atan() / (2.0 * PI)) + 0.25;
        let want = alpha / 2.0 - limit_l;
        assert!((large_noise_limit_diff(c).unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn sign_pattern() {
    for &c in &[0.2, 0.5, 0.9] {
        assert!(risk_difference(&geo(c), 0.01).unwrap() < 0.0, "c={c}");
        assert!(risk_difference(&geo(c), 50.0).unwrap() > 0.0, "c={c}");
    }
    for &c in &[2.0, 5.0] {
        assert!(risk_difference(&geo(c), 0.01).unwrap() < 0.0);
        assert!(risk_difference(&geo(c), 50.0).unwrap() < 0.0);
    }
}

#[test]
fn triangle_risk_is_stable_at_extreme_noise() {
    for &c in &[0.1, 1.0, 10.0] {
        for &s in &[1e-6, 1e-3, 1e3, 1e6] {
            let b = risk_triangle_exact(&geo(c), s).unwrap();
            assert!(b.total().is_finite() && b.total() > 0.0);
            for (_, v) in b.iter() {
                assert!(v >= -1e-12);
            }
        }
    }
}
