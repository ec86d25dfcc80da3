//! Scalar Gaussian special functions.
//!
//! Standard normal density and distribution function, Owen's T-function
//!
//! ```text
//! T(h, a) = φ(h) ∫_0^a φ(hz) / (1 + z²) dz
//! ```
//!
//! and three one-dimensional Gaussian integrals that reduce to it. The
//! closed-form risks in [`crate::exact_risk`] are assembled from these.
//!
//! Owen's T is evaluated with a two-branch hybrid: Owen's series in `a`
//! (with Poisson-tail coefficients) when `h` is small, and a composite
//! Gauss–Legendre rule on the rescaled integrand otherwise. Arguments with
//! `|a| > 1` are folded back into `[0, 1]` with the reflection identity
//! `T(h, a) + T(ah, 1/a) = ½Φ(h) + ½Φ(ah) − Φ(h)Φ(ah)` (h ≥ 0).

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::OnceLock;

use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// Tolerance for algebraic identities between closed forms.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Tolerance for agreement with numerical quadrature of a defining integral.
pub const QUADRATURE_TOL: f64 = 1e-10;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const FRAC_1_2PI: f64 = 1.0 / (2.0 * PI);

/// Owen's series is used for `h` up to this value; beyond it the
/// quadrature branch is both faster and better conditioned.
const SERIES_H_MAX: f64 = 2.0;
const SERIES_MAX_TERMS: usize = 64;

/// `e^{-s²/2}` is below 3e-20 past this point.
const GAUSS_TAIL_CUTOFF: f64 = 9.5;
const GL_ORDER: usize = 20;

/// Arguments of Owen's T-function. `a` may be `±∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TParams {
    h: f64,
    a: f64,
}

impl TParams {
    pub fn new(h: f64, a: f64) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::invalid(format!("Owen's T: h must be finite, got {h}")));
        }
        if a.is_nan() {
            return Err(Error::invalid("Owen's T: a is NaN"));
        }
        Ok(Self { h, a })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

/// Parameters `(m, a, b)` of the integrals `∫_0^m φ(z)Φ(a+bz) dz` and
/// `∫_0^m zφ(z)φ(a+bz) dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralParams {
    m: f64,
    a: f64,
    b: f64,
}

impl IntegralParams {
    pub fn new(m: f64, a: f64, b: f64) -> Result<Self> {
        if !(m.is_finite() && a.is_finite() && b.is_finite()) {
            return Err(Error::invalid(format!(
                "integral parameters must be finite, got m={m}, a={a}, b={b}"
            )));
        }
        if m < 0.0 {
            return Err(Error::invalid(format!("upper limit m must be >= 0, got {m}")));
        }
        Ok(Self { m, a, b })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `a / √(1 + b²)`
    pub fn r(&self) -> f64 {
        self.a / (1.0 + self.b * self.b).sqrt()
    }
}

fn check_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what}: argument must be finite, got {x}")))
    }
}

/// Standard normal density φ(x).
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    check_finite(x, "std_normal_pdf")?;
    Ok(pdf(x))
}

/// Standard normal distribution function Φ(x).
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    check_finite(x, "std_normal_cdf")?;
    Ok(cdf(x))
}

#[inline]
pub(crate) fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ(x). The smaller of Φ(x), Φ(−x) is always computed from `erfc`, so
/// `Φ(x) + Φ(−x) = 1` up to one rounding.
#[inline]
pub(crate) fn cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// Upper tail `1 − Φ(x)` without cancellation for large `x`.
#[inline]
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `Φ(x) − ½` without cancellation near zero.
#[inline]
pub fn std_normal_cdf_minus_half(x: f64) -> f64 {
    0.5 * libm::erf(x * FRAC_1_SQRT_2)
}

/// `Φ(u) − Φ(v)`, taken from whichever tail keeps the difference accurate.
pub fn std_normal_cdf_diff(u: f64, v: f64) -> f64 {
    if u > 0.0 && v > 0.0 {
        std_normal_sf(v) - std_normal_sf(u)
    } else if u < 0.0 && v < 0.0 {
        cdf(u) - cdf(v)
    } else {
        std_normal_cdf_minus_half(u) - std_normal_cdf_minus_half(v)
    }
}

/// `∫_0^r z² φ(z) dz = Φ(r) − ½ − rφ(r)`, odd in `r`.
///
/// For `|r| < 1` the right-hand side loses up to all of its digits, so the
/// Taylor series `φ(0) Σ_k (−½)^k r^{2k+3} / (k! (2k+3))` is summed instead.
pub fn truncated_second_moment(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        return std_normal_cdf_minus_half(r) - r * pdf(r);
    }
    let r2 = r * r;
    let mut power = r * r2; // r^{2k+3}
    let mut coeff = 1.0; // (−½)^k / k!
    let mut sum = 0.0;
    for k in 0..40 {
        let term = coeff * power / (2 * k + 3) as f64;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        power *= r2;
        coeff *= -0.5 / (k + 1) as f64;
    }
    FRAC_1_SQRT_2PI * sum
}

/// Standard normal quantile Φ⁻¹(u) for `u ∈ (0, 1)`.
#[inline]
pub fn std_normal_quantile(u: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * u)
}

/// Owen's T-function.
///
/// Special values are exact: `T(h, 0) = 0`, `T(0, a) = arctan(a)/2π`,
/// `T(h, ±∞) = ±½Φ(−|h|)`.
pub fn owens_t(p: TParams) -> f64 {
    owens_t_raw(p.h, p.a)
}

pub(crate) fn owens_t_raw(h: f64, a: f64) -> f64 {
    let h = h.abs();
    if a < 0.0 {
        return -owens_t_raw(h, -a);
    }
    if a == 0.0 || h.is_infinite() {
        return 0.0;
    }
    if a.is_infinite() {
        return 0.5 * std_normal_sf(h);
    }
    if h == 0.0 {
        return a.atan() * FRAC_1_2PI;
    }
    if a <= 1.0 {
        return owens_t_unit(h, a);
    }
    let ah = a * h;
    let rest = if ah.is_infinite() {
        0.0
    } else {
        owens_t_unit(ah, 1.0 / a)
    };
    if h <= 0.67 {
        0.25 - std_normal_cdf_minus_half(h) * std_normal_cdf_minus_half(ah) - rest
    } else {
        let (p, q) = (std_normal_sf(h), std_normal_sf(ah));
        0.5 * (p + q) - p * q - rest
    }
}

/// `arctan(a)/2π − T(h, a)`.
///
/// This is the combination that appears in the closed-form risks; for small
/// `h` it is O(h²) and is summed directly rather than by subtraction.
pub fn owens_t_arctan_gap(h: f64, a: f64) -> f64 {
    let h = h.abs();
    if a < 0.0 {
        return -owens_t_arctan_gap(h, -a);
    }
    if a <= 1.0 && h <= SERIES_H_MAX {
        return owens_series_gap(h, a);
    }
    let atan = if a.is_infinite() { 0.5 * PI } else { a.atan() };
    atan * FRAC_1_2PI - owens_t_raw(h, a)
}

/// T(h, a) for `h > 0`, `0 < a ≤ 1`.
fn owens_t_unit(h: f64, a: f64) -> f64 {
    if h <= SERIES_H_MAX {
        a.atan() * FRAC_1_2PI - owens_series_gap(h, a)
    } else {
        owens_t_quadrature(h, a)
    }
}

/// Owen's series for `arctan(a)/2π − T(h, a)`, `0 ≤ a ≤ 1`:
///
/// ```text
/// T(h, a) = (1/2π) [ arctan a + Σ_{j≥1} (−1)^j P_j a^{2j−1} / (2j−1) ]
/// ```
///
/// with `P_j = P(Poisson(h²/2) ≥ j)`. The tails are accumulated from the
/// far end so they keep full relative precision.
fn owens_series_gap(h: f64, a: f64) -> f64 {
    let x = 0.5 * h * h;
    let mut pmf = [0.0f64; SERIES_MAX_TERMS];
    pmf[0] = (-x).exp();
    let mut len = 1;
    while len < SERIES_MAX_TERMS {
        pmf[len] = pmf[len - 1] * x / len as f64;
        len += 1;
        if (len as f64) > x && pmf[len - 1] < 1e-22 {
            break;
        }
    }
    // tail[j] = Σ_{i≥j} pmf[i], overwritten in place
    let mut acc = 0.0;
    for p in pmf[..len].iter_mut().rev() {
        acc += *p;
        *p = acc;
    }
    let a2 = a * a;
    let mut apow = a;
    let mut sum = 0.0;
    for (j, tail) in pmf[..len].iter().enumerate().skip(1) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * tail * apow / (2 * j - 1) as f64;
        apow *= a2;
    }
    -sum * FRAC_1_2PI
}

/// T(h, a) for `h > SERIES_H_MAX`, `0 < a ≤ 1`, via `s = hz`:
///
/// ```text
/// T(h, a) = e^{−h²/2} / (2πh) ∫_0^{ah} e^{−s²/2} / (1 + s²/h²) ds
/// ```
///
/// The poles at `s = ±ih` stay at distance > 2 from the real axis, so unit
/// panels of a 20-point Gauss–Legendre rule are exact to rounding.
fn owens_t_quadrature(h: f64, a: f64) -> f64 {
    let prefactor = (-0.5 * h * h).exp() * FRAC_1_2PI / h;
    if prefactor == 0.0 {
        return 0.0;
    }
    let upper = (a * h).min(GAUSS_TAIL_CUTOFF);
    let inv_h2 = 1.0 / (h * h);
    let panels = upper.ceil().max(1.0) as usize;
    let width = upper / panels as f64;
    let (nodes, weights) = gauss_legendre();
    let mut total = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            let s = mid + half * x;
            panel += w * (-0.5 * s * s).exp() / (1.0 + s * s * inv_h2);
        }
        total += half * panel;
    }
    prefactor * total
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on
/// the Legendre recurrence.
fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// `∫_0^m φ(z) Φ(a + bz) dz`.
///
/// With `r = a/√(1+b²)` and `m > 0`, `a ≠ 0`:
///
/// ```text
/// T(m, r/m) + T(r, m/r) − T(m, a/m + b) − T(r, b + m(1+b²)/a)
///     + Φ(m)Φ(r) − ½Φ(r) + T(r, b)
/// ```
///
/// `a = 0` is delegated to [`int_phi_cdf_linear`], the limit of this form.
pub fn int_phi_cdf(p: IntegralParams) -> f64 {
    let IntegralParams { m, a, b } = p;
    if m == 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return phi_cdf_linear(m, b);
    }
    let r = p.r();
    let big_phi_r = cdf(r);
    owens_t_raw(m, r / m) + owens_t_raw(r, m / r)
        - owens_t_raw(m, a / m + b)
        - owens_t_raw(r, b + m * (1.0 + b * b) / a)
        + std_normal_cdf_minus_half(m) * big_phi_r
        + owens_t_raw(r, b)
}

/// `∫_0^m φ(z) Φ(bz) dz = ½Φ(m) − ¼ − T(m, b) + arctan(b)/2π`.
pub fn int_phi_cdf_linear(m: f64, b: f64) -> Result<f64> {
    if !(m.is_finite() && b.is_finite()) || m < 0.0 {
        return Err(Error::invalid(format!(
            "int_phi_cdf_linear requires finite m >= 0 and finite b, got m={m}, b={b}"
        )));
    }
    Ok(phi_cdf_linear(m, b))
}

fn phi_cdf_linear(m: f64, b: f64) -> f64 {
    0.5 * std_normal_cdf_minus_half(m) + owens_t_arctan_gap(m, b)
}

/// `∫_0^m z φ(z) φ(a + bz) dz`, with `r = a/√(1+b²)`, `s = √(1+b²)`:
///
/// ```text
/// φ(r)/(1+b²) [φ(br) − φ(ms + br)] + ab/(1+b²)^{3/2} φ(r) [Φ(br) − Φ(ms + br)]
/// ```
pub fn int_z_phi_phi(p: IntegralParams) -> f64 {
    let IntegralParams { m, a, b } = p;
    if m == 0.0 {
        return 0.0;
    }
    let s2 = 1.0 + b * b;
    let s = s2.sqrt();
    let r = a / s;
    let lo = b * r;
    let hi = m * s + b * r;
    let phi_r = pdf(r);
    phi_r / s2 * (pdf(lo) - pdf(hi)) + a * b / (s2 * s) * phi_r * std_normal_cdf_diff(lo, hi)
}
