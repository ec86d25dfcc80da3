//! Seeded Monte Carlo risk estimation.
//!
//! Work is split into fixed-size chunks. Chunk `k` draws from the ChaCha8
//! stream `(seed, k)`, accumulates a Welford summary, and the summaries are
//! merged in chunk order. Scheduling therefore cannot change any bit of the
//! result: the thread count only affects wall time.
//!
//! Normals come from the inverse CDF applied to one 53-bit uniform each, so
//! every sample consumes a fixed number of words from its stream.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_risk::check_sigma;
use crate::gaussfn::std_normal_quantile;
use crate::geometry::{dist_sq, project, project_planar, ConvexPolytope};

/// Samples per substream unless configured otherwise.
pub const DEFAULT_CHUNK: u64 = 1 << 14;

/// Critical value of `√n·D` for the Kolmogorov–Smirnov test at the 0.1%
/// level.
pub const KS_CRITICAL_0_001: f64 = 1.95;

/// Monte Carlo estimate of an expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl RiskEstimate {
    /// `|mean − value| ≤ k·stderr + slack`.
    pub fn agrees_with(&self, value: f64, k: f64, slack: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr + slack
    }
}

/// Sample count, seed and chunk size of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    n: u64,
    seed: u64,
    chunk: u64,
}

impl McConfig {
    pub fn new(n: u64, seed: u64) -> Result<Self> {
        Self::with_chunk(n, seed, DEFAULT_CHUNK)
    }

    pub fn with_chunk(n: u64, seed: u64, chunk: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("sample count must be >= 1"));
        }
        if chunk == 0 {
            return Err(Error::invalid("chunk size must be >= 1"));
        }
        Ok(Self { n, seed, chunk })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chunk(&self) -> u64 {
        self.chunk
    }

    fn num_chunks(&self) -> u64 {
        self.n.div_ceil(self.chunk)
    }
}

/// Uniform and normal draws from one ChaCha8 substream.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform on the open interval `(0, 1)`, on the grid `(k + ½)·2⁻⁵³`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        std_normal_quantile(self.uniform())
    }
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    pub(crate) fn estimate(&self, seed: u64) -> RiskEstimate {
        let stderr = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        } else {
            0.0
        };
        RiskEstimate { mean: self.mean, stderr, n: self.n, seed }
    }
}

/// Runs `body(sampler, first_index, len)` on every chunk in parallel and
/// returns the results in chunk order.
pub(crate) fn map_chunks<T, F>(cfg: &McConfig, body: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut Sampler, u64, u64) -> Result<T> + Sync,
{
    (0..cfg.num_chunks())
        .into_par_iter()
        .map(|k| {
            let start = k * cfg.chunk;
            let len = cfg.chunk.min(cfg.n - start);
            let mut sampler = Sampler::new(cfg.seed, k);
            body(&mut sampler, start, len)
        })
        .collect()
}

/// Estimates `m` expectations from shared draws. `sample` fills one value
/// per output for a single draw; common random numbers across outputs make
/// their differences much less noisy than independent runs would.
pub fn estimate_many<F>(cfg: &McConfig, m: usize, sample: F) -> Result<Vec<RiskEstimate>>
where
    F: Fn(&mut Sampler, u64, &mut [f64]) -> Result<()> + Sync,
{
    let parts = map_chunks(cfg, |sampler, start, len| {
        let mut acc = vec![Welford::default(); m];
        let mut buf = vec![0.0; m];
        for i in start..start + len {
            sample(sampler, i, &mut buf)?;
            for (a, &x) in acc.iter_mut().zip(&buf) {
                a.push(x);
            }
        }
        Ok(acc)
    })?;
    let mut total = vec![Welford::default(); m];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total.iter().map(|w| w.estimate(cfg.seed)).collect())
}

/// Estimates `E f(draw)` for a scalar `f`.
pub fn estimate<F>(cfg: &McConfig, sample: F) -> Result<RiskEstimate>
where
    F: Fn(&mut Sampler, u64) -> Result<f64> + Sync,
{
    let out = estimate_many(cfg, 1, |s, i, buf| {
        buf[0] = sample(s, i)?;
        Ok(())
    })?;
    Ok(out[0])
}

/// Loss of one projection, `‖Π_P(θ* + σz) − θ*‖²`, with a sanity bound.
pub(crate) struct LossEvaluator<'a> {
    polytope: &'a ConvexPolytope,
    theta: &'a [f64],
    sigma: f64,
    bound: f64,
}

impl<'a> LossEvaluator<'a> {
    pub(crate) fn new(polytope: &'a ConvexPolytope, theta: &'a [f64], sigma: f64) -> Self {
        let diam = polytope.diameter_sq();
        Self { polytope, theta, sigma, bound: diam * (1.0 + 1e-9) + 1e-9 * (1.0 + diam) }
    }

    /// Draws the noise from `sampler` and returns the loss.
    #[inline]
    pub(crate) fn draw(&self, sampler: &mut Sampler, index: u64) -> Result<f64> {
        let loss = if self.polytope.dim() == 2 {
            let z0 = sampler.normal();
            let z1 = sampler.normal();
            self.loss_planar([z0, z1])
        } else {
            let y: Vec<f64> = self.theta.iter().map(|t| t + self.sigma * sampler.normal()).collect();
            let q = project(self.polytope, &y).map_err(|e| Error::SampleFailure {
                sample: index,
                reason: e.to_string(),
            })?;
            dist_sq(&q, self.theta)
        };
        self.check(loss, index)
    }

    #[inline]
    pub(crate) fn loss_planar(&self, z: [f64; 2]) -> f64 {
        let y = [self.theta[0] + self.sigma * z[0], self.theta[1] + self.sigma * z[1]];
        let q = project_planar(self.polytope.planar_vertices(), y);
        (q[0] - self.theta[0]).powi(2) + (q[1] - self.theta[1]).powi(2)
    }

    #[inline]
    pub(crate) fn check(&self, loss: f64, index: u64) -> Result<f64> {
        if loss.is_finite() && loss <= self.bound {
            Ok(loss)
        } else {
            Err(Error::SampleFailure {
                sample: index,
                reason: format!("loss {loss:e} exceeds squared diameter {:e}", self.bound),
            })
        }
    }
}

/// Monte Carlo risk `E‖Π_P(θ* + σZ) − θ*‖²`.
pub fn mc_risk(p: &ConvexPolytope, q: &crate::exact_risk::RiskQuery, cfg: &McConfig) -> Result<RiskEstimate> {
    p.require_member(q.theta_star())?;
    let eval = LossEvaluator::new(p, q.theta_star(), q.sigma());
    estimate(cfg, |s, i| eval.draw(s, i))
}

/// [`mc_risk`] at the effective noise level `σ/√n_obs` of `n_obs` averaged
/// observations.
pub fn mc_risk_effective(
    p: &ConvexPolytope,
    theta_star: &[f64],
    sigma: f64,
    n_obs: u64,
    cfg: &McConfig,
) -> Result<RiskEstimate> {
    check_sigma(sigma)?;
    if n_obs == 0 {
        return Err(Error::invalid("n_obs must be >= 1"));
    }
    let q = crate::exact_risk::RiskQuery::new(theta_star.to_vec(), sigma / (n_obs as f64).sqrt())?;
    mc_risk(p, &q, cfg)
}

/// Draws a standard normal vector and normalizes it, redrawing the
/// (measure-zero) zero vector.
#[inline]
pub(crate) fn draw_direction(sampler: &mut Sampler, out: &mut [f64]) {
    loop {
        let mut norm_sq = 0.0;
        for x in out.iter_mut() {
            *x = sampler.normal();
            norm_sq += *x * *x;
        }
        if norm_sq > 0.0 {
            let inv = 1.0 / norm_sq.sqrt();
            out.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

/// `n` independent uniform directions on `S^{d−1}`.
pub fn sample_unit_sphere(d: usize, n: u64, seed: u64) -> Result<Vec<Vec<f64>>> {
    if d == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    let cfg = McConfig::new(n, seed)?;
    let chunks = map_chunks(&cfg, |sampler, _, len| {
        Ok((0..len)
            .map(|_| {
                let mut u = vec![0.0; d];
                draw_direction(sampler, &mut u);
                u
            })
            .collect::<Vec<_>>())
    })?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Kolmogorov–Smirnov statistic of one sample against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub n: u64,
    pub statistic: f64,
    pub scaled: f64,
}

impl KsResult {
    pub fn passes(&self, critical: f64) -> bool {
        self.scaled < critical
    }
}

/// KS checks that `u₂/u₁` is standard Cauchy for a uniform direction on
/// the circle, unconditionally and under each of the two sign conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyRatioReport {
    pub seed: u64,
    pub all: KsResult,
    pub given_u1_nonneg: KsResult,
    pub given_u2_pos: KsResult,
    pub critical: f64,
}

impl CauchyRatioReport {
    pub fn passes(&self) -> bool {
        self.all.passes(self.critical)
            && self.given_u1_nonneg.passes(self.critical)
            && self.given_u2_pos.passes(self.critical)
    }
}

/// Standard Cauchy distribution function `½ + arctan(r)/π`.
pub fn cauchy_cdf(r: f64) -> f64 {
    0.5 + r.atan() / PI
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous `cdf`.
pub fn ks_statistic(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> KsResult {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    KsResult { n: sample.len() as u64, statistic: d, scaled: d * n.sqrt() }
}

pub fn cauchy_ratio_check(n: u64, seed: u64) -> Result<CauchyRatioReport> {
    if n < 1000 {
        return Err(Error::invalid(format!("cauchy_ratio_check needs n >= 1000, got {n}")));
    }
    let dirs = sample_unit_sphere(2, n, seed)?;
    let ratio = |u: &Vec<f64>| u[1] / u[0];
    let all: Vec<f64> = dirs.iter().map(ratio).collect();
    let u1: Vec<f64> = dirs.iter().filter(|u| u[0] >= 0.0).map(ratio).collect();
    let u2: Vec<f64> = dirs.iter().filter(|u| u[1] > 0.0).map(ratio).collect();
    Ok(CauchyRatioReport {
        seed,
        all: ks_statistic(all, cauchy_cdf),
        given_u1_nonneg: ks_statistic(u1, cauchy_cdf),
        given_u2_pos: ks_statistic(u2, cauchy_cdf),
        critical: KS_CRITICAL_0_001,
    })
}
