//! Closed-form risks of the projection estimator over the segment `Θ_S` and
//! the triangle `Θ_L` of [`ExampleGeometry`], and their two asymptotic
//! regimes.
//!
//! The triangle risk is available both as a sum of seven per-region terms
//! and as a single assembled expression; the two are tested against each
//! other. Differences `Φ(x) − ½`, upper tails and `Φ(r) − ½ − rφ(r)` go
//! through the cancellation-free helpers in [`crate::gaussfn`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussfn::{
    cdf, owens_t_arctan_gap, owens_t_raw, pdf, std_normal_cdf_minus_half, std_normal_sf,
    truncated_second_moment,
};
use crate::geometry::{ExampleGeometry, RegionLabel};

/// One risk evaluation: true parameter and noise level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskQuery {
    theta_star: Vec<f64>,
    sigma: f64,
}

impl RiskQuery {
    pub fn new(theta_star: Vec<f64>, sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        if theta_star.is_empty() || theta_star.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("theta_star must be a nonempty finite point"));
        }
        Ok(Self { theta_star, sigma })
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Risk contributions `E[‖θ̂ − θ*‖² 1{Y ∈ A}]` of the seven regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionRiskBreakdown {
    terms: [f64; 7],
    total: f64,
}

impl RegionRiskBreakdown {
    fn from_terms(terms: [f64; 7]) -> Self {
        Self { terms, total: terms.iter().sum() }
    }

    pub fn get(&self, label: RegionLabel) -> f64 {
        self.terms[label.index()]
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn iter(&self) -> impl Iterator<Item = (RegionLabel, f64)> + '_ {
        RegionLabel::ALL.iter().map(move |&l| (l, self.terms[l.index()]))
    }
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("sigma must be finite and > 0, got {sigma}")))
    }
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("c must be finite and > 0, got {c}")))
    }
}

/// Risk over `Θ_S` at `θ* = t*·v2`:
///
/// ```text
/// α[(t*)²Φ(a) + (σ²/α)(Φ(b) − Φ(a) − bφ(b) + aφ(a)) + (1 − t*)²Φ(−b)]
/// ```
///
/// with `a = −√α t*/σ`, `b = √α (1 − t*)/σ`.
pub fn risk_segment_exact(g: &ExampleGeometry, t_star: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !(0.0..=1.0).contains(&t_star) {
        return Err(Error::invalid(format!("t_star must lie in [0, 1], got {t_star}")));
    }
    let alpha = g.alpha();
    let root = alpha.sqrt();
    let a = -root * t_star / sigma;
    let b = root * (1.0 - t_star) / sigma;
    // Φ(b) − Φ(a) − bφ(b) + aφ(a) = M(b) + M(−a), M(r) = ∫_0^r z²φ
    let middle = truncated_second_moment(b) + truncated_second_moment(-a);
    Ok(alpha * t_star * t_star * cdf(a) + sigma * sigma * middle + alpha * (1.0 - t_star).powi(2) * std_normal_sf(b))
}

/// Per-region risk over `Θ_L` at `θ* = v1`.
pub fn risk_triangle_exact(g: &ExampleGeometry, sigma: f64) -> Result<RegionRiskBreakdown> {
    check_sigma(sigma)?;
    if g.x().is_some() {
        return Err(Error::invalid("triangle risk is defined for Θ_L only; x must be absent"));
    }
    let c = g.c();
    let alpha = g.alpha();
    let s2 = sigma * sigma;
    let h = 1.0 / sigma;
    let u = 1.0 / (c * sigma);
    let k = alpha.sqrt() / sigma;

    let c_sqrt_alpha = c * alpha.sqrt();
    debug_assert!((c_sqrt_alpha - (c * c + 1.0).sqrt()).abs() <= 1e-12 * c_sqrt_alpha);

    let mut terms = [0.0; 7];
    terms[RegionLabel::Interior.index()] =
        s2 * (-h * pdf(h) * std_normal_cdf_minus_half(u) + 2.0 * owens_t_arctan_gap(h, 1.0 / c));
    terms[RegionLabel::A1.index()] = 0.0;
    terms[RegionLabel::A2.index()] = alpha
        * (std_normal_sf(k) * std_normal_sf(u) + owens_t_raw(u, c_sqrt_alpha) + owens_t_raw(k, 1.0 / c_sqrt_alpha)
            - owens_t_raw(u, c));
    terms[RegionLabel::A3.index()] = 0.5 * std_normal_sf(h);
    terms[RegionLabel::A12.index()] = 0.5 * s2 * truncated_second_moment(k);
    terms[RegionLabel::A13.index()] = 0.5 * s2 * truncated_second_moment(h);
    terms[RegionLabel::A23.index()] =
        std_normal_sf(h) * (std_normal_cdf_minus_half(u) + s2 * truncated_second_moment(u));
    Ok(RegionRiskBreakdown::from_terms(terms))
}

/// Risk over `Θ_L` at `θ* = v1` as one expression:
///
/// ```text
/// −σφ(1/σ)Φ(1/cσ) + σ²[½(Φ(1/σ) − ½) − 2T(1/σ, 1/c) + arctan(1/c)/π]
///   + Φ(−1/σ)[σ²(Φ(1/cσ) − (1/cσ)φ(1/cσ) − ½) + Φ(1/cσ)]
///   + (σ²/2)(Φ(√α/σ) − (√α/σ)φ(√α/σ) − ½)
///   + α[Φ(−1/cσ)Φ(−√α/σ) + T(1/cσ, √(c²+1)) + T(√α/σ, 1/√(c²+1)) − T(1/cσ, c)]
/// ```
pub fn risk_triangle_closed_form(g: &ExampleGeometry, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if g.x().is_some() {
        return Err(Error::invalid("triangle risk is defined for Θ_L only; x must be absent"));
    }
    let c = g.c();
    let alpha = g.alpha();
    let s2 = sigma * sigma;
    let h = 1.0 / sigma;
    let u = 1.0 / (c * sigma);
    let k = alpha.sqrt() / sigma;
    let root = (c * c + 1.0).sqrt();

    let lead = -sigma * pdf(h) * cdf(u);
    let interior = s2 * (0.5 * std_normal_cdf_minus_half(h) + 2.0 * owens_t_arctan_gap(h, 1.0 / c));
    let top = std_normal_sf(h) * (s2 * truncated_second_moment(u) + cdf(u));
    let diagonal = 0.5 * s2 * truncated_second_moment(k);
    let corner = alpha
        * (std_normal_sf(u) * std_normal_sf(k) + owens_t_raw(u, root) + owens_t_raw(k, 1.0 / root)
            - owens_t_raw(u, c));
    Ok(lead + interior + top + diagonal + corner)
}

/// `R_σ(v1; Θ_S) − R_σ(v1; Θ_L)`.
pub fn risk_difference(g: &ExampleGeometry, sigma: f64) -> Result<f64> {
    let base = ExampleGeometry::new(g.c())?;
    Ok(risk_segment_exact(&base, 0.0, sigma)? - risk_triangle_exact(&base, sigma)?.total())
}

/// Leading coefficient of the risk difference as `σ → 0`:
/// `(R_S − R_L)/σ² → −arctan(1/c)/π`.
pub fn small_noise_diff_coeff(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok(-(1.0 / c).atan() / PI)
}

/// Limit of the risk difference as `σ → ∞`:
/// `g(c) = 1/(4c²) − (1 + c²)/(2πc²) · arctan(1/c)`.
pub fn large_noise_limit_diff(c: f64) -> Result<f64> {
    check_c(c)?;
    let c2 = c * c;
    Ok(0.25 / c2 - (1.0 + c2) / (2.0 * PI * c2) * (1.0 / c).atan())
}
