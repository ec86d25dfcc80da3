//! Shared oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tanh–sinh quadrature of `f` over `[a, b]`, split into panels of width at
/// most 0.5 so narrow Gaussian bumps are resolved.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a);
    }
    let panels = ((b - a) / 0.5).ceil().max(1.0) as usize;
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * w;
            let hi = if k + 1 == panels { b } else { lo + w };
            quadrature::double_exponential::integrate(&f, lo, hi, 1e-15).integral
        })
        .sum()
}

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Φ by quadrature of the density, independent of any erf routine.
pub fn big_phi(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - big_phi(-x);
    }
    0.5 + integrate(phi, 0.0, x)
}

/// Owen's T from its definition; infinite `a` through `z = t/(1 − t)`.
pub fn owens_t_quad(h: f64, a: f64) -> f64 {
    let integrand = |z: f64| phi(h * z) / (1.0 + z * z);
    if a.is_infinite() {
        let v = integrate(
            |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let z = t / (1.0 - t);
                integrand(z) / ((1.0 - t) * (1.0 - t))
            },
            0.0,
            1.0,
        );
        return a.signum() * phi(h) * v;
    }
    phi(h) * integrate(integrand, 0.0, a)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}
