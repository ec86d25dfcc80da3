use std::f64::consts::PI;

use riskrev_core::exact_risk::{risk_segment_exact, risk_triangle_exact, RiskQuery};
use riskrev_core::geometry::{project, ConvexPolytope, ExampleGeometry};
use riskrev_core::montecarlo::*;

fn square(half: f64) -> ConvexPolytope {
    ConvexPolytope::new(vec![
        vec![-half, -half],
        vec![half, -half],
        vec![half, half],
        vec![-half, half],
    ])
    .unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn bitwise_deterministic_across_worker_counts() {
    let g = ExampleGeometry::new(0.5).unwrap();
    let tri = g.triangle();
    let q = RiskQuery::new(vec![0.0, 0.0], 3.0).unwrap();
    let cfg = McConfig::with_chunk(100_003, 77, 1000).unwrap();
    let one = in_pool(1, || mc_risk(&tri, &q, &cfg).unwrap());
    for threads in [2, 3, 8] {
        let many = in_pool(threads, || mc_risk(&tri, &q, &cfg).unwrap());
        assert_eq!(one.mean.to_bits(), many.mean.to_bits());
        assert_eq!(one.stderr.to_bits(), many.stderr.to_bits());
        assert_eq!(one.n, many.n);
    }
    assert_eq!(one.n, 100_003);
    assert_eq!(one.seed, 77);
    let other_seed = mc_risk(&tri, &q, &McConfig::with_chunk(100_003, 78, 1000).unwrap()).unwrap();
    assert_ne!(one.mean, other_seed.mean);
}

#[test]
fn general_dimension_path_is_deterministic() {
    let p = ConvexPolytope::new(vec![
        vec![0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ])
    .unwrap();
    let q = RiskQuery::new(vec![0.0, 0.0, 0.0], 1.0).unwrap();
    let cfg = McConfig::with_chunk(20_000, 5, 3000).unwrap();
    let a = in_pool(1, || mc_risk(&p, &q, &cfg).unwrap());
    let b = in_pool(4, || mc_risk(&p, &q, &cfg).unwrap());
    assert_eq!(a, b);
}

#[test]
fn unconstrained_risk_is_sigma_squared_times_dimension() {
    let big = square(1e3);
    let q = RiskQuery::new(vec![0.0, 0.0], 1.0).unwrap();
    let est = mc_risk(&big, &q, &McConfig::new(400_000, 1).unwrap()).unwrap();
    assert!(est.agrees_with(2.0, 4.0, 0.0), "{est:?}");

    let unit = square(0.5);
    let s = 1e-3;
    let q = RiskQuery::new(vec![0.1, -0.2], s).unwrap();
    let est = mc_risk(&unit, &q, &McConfig::new(400_000, 2).unwrap()).unwrap();
    let scaled = est.mean / (s * s);
    assert!((scaled - 2.0).abs() <= 4.0 * est.stderr / (s * s), "{scaled}");
}

#[test]
fn effective_noise_matches_exact_segment_risk() {
    let g = ExampleGeometry::new(1.0).unwrap();
    let est = mc_risk_effective(&g.segment(), &[0.0, 0.0], 10.0, 100, &McConfig::new(400_000, 3).unwrap())
        .unwrap();
    let exact = risk_segment_exact(&g, 0.0, 1.0).unwrap();
    assert!(est.agrees_with(exact, 4.0, 0.0), "{est:?} vs {exact}");
    let a = mc_risk_effective(&g.segment(), &[0.0, 0.0], 1.0, 1, &McConfig::new(1000, 3).unwrap()).unwrap();
    let q = RiskQuery::new(vec![0.0, 0.0], 1.0).unwrap();
    let b = mc_risk(&g.segment(), &q, &McConfig::new(1000, 3).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn large_noise_approaches_limit() {
    let c = 0.75;
    let g = ExampleGeometry::new(c).unwrap();
    let limit = g.alpha() * (0.25 + (1.0 / c).atan() / (2.0 * PI)) + 0.25;
    let mut errors = Vec::new();
    for &s in &[1e2, 1e3, 1e4] {
        let q = RiskQuery::new(vec![0.0, 0.0], s).unwrap();
        let est = mc_risk(&g.triangle(), &q, &McConfig::new(1_000_000, 8).unwrap()).unwrap();
        errors.push(((est.mean - limit).abs(), est.stderr));
        if s == 1e4 {
            assert!(est.agrees_with(limit, 4.0, 1e-3), "{est:?} vs {limit}");
        }
    }
    for w in errors.windows(2) {
        let slack = 4.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt();
        assert!(w[1].0 <= w[0].0 + slack, "{errors:?}");
    }
}

#[test]
fn losses_never_exceed_squared_diameter() {
    let g = ExampleGeometry::new(0.3).unwrap();
    let tri = g.triangle();
    let diam = tri.diameter_sq();
    let cfg = McConfig::new(200_000, 4).unwrap();
    let violations = estimate(&cfg, |s, _| {
        let y = [1e3 * s.normal(), 1e3 * s.normal()];
        let q = project(&tri, &y).unwrap();
        Ok(if q[0] * q[0] + q[1] * q[1] > diam * (1.0 + 1e-12) { 1.0 } else { 0.0 })
    })
    .unwrap();
    assert_eq!(violations.mean, 0.0);
}

#[test]
fn exact_triangle_risk_agrees_at_moderate_noise() {
    let g = ExampleGeometry::new(0.5).unwrap();
    let q = RiskQuery::new(vec![0.0, 0.0], 10.0).unwrap();
    let est = mc_risk(&g.triangle(), &q, &McConfig::new(1_000_000, 21).unwrap()).unwrap();
    let exact = risk_triangle_exact(&g, 10.0).unwrap().total();
    assert!(est.agrees_with(exact, 4.0, 0.0), "{est:?} vs {exact}");
}

#[test]
fn sphere_samples() {
    let dirs = sample_unit_sphere(2, 100_000, 12).unwrap();
    assert_eq!(dirs.len(), 100_000);
    for u in &dirs {
        assert!(((u[0] * u[0] + u[1] * u[1]).sqrt() - 1.0).abs() <= 1e-12);
    }
    let n = dirs.len() as f64;
    for k in 0..2 {
        let mean = dirs.iter().map(|u| u[k]).sum::<f64>() / n;
        // Var(u_k) = 1/2 on the circle
        assert!(mean.abs() <= 4.0 * (0.5 / n).sqrt(), "coordinate {k}: {mean}");
    }
    let frac = dirs.iter().filter(|u| u[0] > 0.0).count() as f64 / n;
    assert!((frac - 0.5).abs() <= 4.0 * (0.25 / n).sqrt());
    assert_eq!(sample_unit_sphere(2, 1000, 12).unwrap()[..], dirs[..1000]);

    let five = sample_unit_sphere(5, 1000, 1).unwrap();
    for u in &five {
        assert!((u.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() <= 1e-12);
    }
    assert!(sample_unit_sphere(0, 10, 1).is_err());
}

#[test]
fn cauchy_ratio_default_seed() {
    let report = cauchy_ratio_check(100_000, 20240613).unwrap();
    assert!(report.passes(), "{report:?}");
    assert!(report.given_u1_nonneg.n > 45_000 && report.given_u2_pos.n > 45_000);
    assert_eq!(cauchy_cdf(0.0), 0.5);
    assert!((cauchy_cdf(1.0) - 0.75).abs() < 1e-16);
}

#[test]
fn ks_statistic_detects_a_wrong_law() {
    // ratio of uniforms on a square is not Cauchy
    let mut s = Sampler::new(3, 0);
    let sample: Vec<f64> = (0..20_000).map(|_| (s.uniform() - 0.5) / (s.uniform() - 0.5)).collect();
    assert!(!ks_statistic(sample, cauchy_cdf).passes(KS_CRITICAL_0_001));
    let mut s = Sampler::new(3, 1);
    let sample: Vec<f64> = (0..20_000).map(|_| s.normal() / s.normal()).collect();
    assert!(ks_statistic(sample, cauchy_cdf).passes(KS_CRITICAL_0_001));
}
