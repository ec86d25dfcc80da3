//! Risk in the two noise limits and worst-case comparisons.
//!
//! As `σ → 0` the risk at `θ` behaves like `σ²δ(T_P(θ))`, with `δ` the
//! statistical dimension of the tangent cone. As `σ → ∞` the estimator
//! concentrates on the vertices, selected with probabilities proportional to
//! their normal-cone measure, and the risk tends to `Σ p_i‖v_i − θ‖²`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_risk::check_sigma;
use crate::geometry::{
    argmax_vertex, dist_sq, normal_cone_angle_2d, project_cone_nonneg, tangent_cone_2d, ConeKind,
    Cone2D, ConvexPolytope, ExampleGeometry,
};
use crate::montecarlo::{draw_direction, estimate, estimate_many, map_chunks, LossEvaluator, McConfig, RiskEstimate};

/// Candidate points per edge in the finite-σ supremum search.
pub const DEFAULT_EDGE_POINTS: usize = 32;

/// Number of combined standard errors a sup-risk gap must exceed.
pub const REVERSAL_THRESHOLD_SE: f64 = 4.0;

const CONE_PROJECTION_TOL: f64 = 1e-10;

/// `δ(C) = E‖Π_C(Z)‖²` for a planar cone.
pub fn statistical_dimension_2d(cone: &Cone2D) -> f64 {
    match cone.kind() {
        ConeKind::Point => 0.0,
        ConeKind::Ray => 0.5,
        ConeKind::Line => 1.0,
        ConeKind::Wedge | ConeKind::Halfplane => 0.5 + cone.apex_angle() / PI,
        ConeKind::Full => 2.0,
    }
}

/// Monte Carlo `δ` of the cone generated by `generators`.
pub fn statistical_dimension_mc(generators: &[Vec<f64>], n: u64, seed: u64) -> Result<RiskEstimate> {
    let d = generators
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::invalid("cone needs at least one generator"))?;
    if d == 0 {
        return Err(Error::invalid("generators must have positive dimension"));
    }
    let cfg = McConfig::new(n, seed)?;
    estimate(&cfg, |sampler, index| {
        let z: Vec<f64> = (0..d).map(|_| sampler.normal()).collect();
        let p = project_cone_nonneg(generators, &z, CONE_PROJECTION_TOL).map_err(|e| {
            Error::SampleFailure { sample: index, reason: e.to_string() }
        })?;
        Ok(p.iter().map(|x| x * x).sum())
    })
}

/// Leading-order risk `σ²δ(T_P(θ))` for a planar polytope.
pub fn small_noise_risk(p: &ConvexPolytope, theta: &[f64], sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let cone = tangent_cone_2d(p, theta)?;
    Ok(sigma * sigma * statistical_dimension_2d(&cone))
}

/// Leading-order risk `σ²δ(C)` with `δ` estimated from generators of the
/// tangent cone, for any dimension.
pub fn small_noise_risk_mc(generators: &[Vec<f64>], sigma: f64, n: u64, seed: u64) -> Result<RiskEstimate> {
    check_sigma(sigma)?;
    let est = statistical_dimension_mc(generators, n, seed)?;
    let s2 = sigma * sigma;
    Ok(RiskEstimate { mean: est.mean * s2, stderr: est.stderr * s2, ..est })
}

/// Law of the vertex selected by a uniform random direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexDistribution {
    probs: Vec<f64>,
    samples: Option<u64>,
}

impl VertexDistribution {
    /// Analytic probabilities; must sum to one within `1e-9`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("probabilities must lie in [0, 1]"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { probs, samples: None })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Sample count for empirical distributions.
    pub fn samples(&self) -> Option<u64> {
        self.samples
    }

    /// `√(p(1 − p)/n)` for empirical distributions.
    pub fn binomial_stderr(&self, i: usize) -> Option<f64> {
        let n = self.samples? as f64;
        let p = self.probs[i];
        Some((p * (1.0 - p) / n).sqrt())
    }
}

/// `p_i = |N_P(v_i) ∩ S¹| / 2π`.
pub fn vertex_probabilities_2d(p: &ConvexPolytope) -> Result<VertexDistribution> {
    let probs = (0..p.num_vertices())
        .map(|i| normal_cone_angle_2d(p, i).map(|a| a / (2.0 * PI)))
        .collect::<Result<Vec<_>>>()?;
    VertexDistribution::new(probs)
}

/// Empirical frequencies of the exposed vertex over `n` random directions.
pub fn vertex_probabilities_mc(p: &ConvexPolytope, n: u64, seed: u64) -> Result<VertexDistribution> {
    let cfg = McConfig::new(n, seed)?;
    let k = p.num_vertices();
    let d = p.dim();
    let counts = map_chunks(&cfg, |sampler, _, len| {
        let mut counts = vec![0u64; k];
        let mut u = vec![0.0; d];
        for _ in 0..len {
            draw_direction(sampler, &mut u);
            counts[argmax_vertex(p.vertices(), &u)] += 1;
        }
        Ok(counts)
    })?;
    let mut total = vec![0u64; k];
    for c in &counts {
        for (t, x) in total.iter_mut().zip(c) {
            *t += x;
        }
    }
    Ok(VertexDistribution {
        probs: total.iter().map(|&c| c as f64 / n as f64).collect(),
        samples: Some(n),
    })
}

fn check_aligned(p: &ConvexPolytope, dist: &VertexDistribution) -> Result<()> {
    if dist.probs.len() != p.num_vertices() {
        return Err(Error::DimensionMismatch { expected: p.num_vertices(), got: dist.probs.len() });
    }
    Ok(())
}

/// `R_∞(θ) = Σ p_i ‖v_i − θ‖²`.
pub fn limiting_risk(p: &ConvexPolytope, theta: &[f64], dist: &VertexDistribution) -> Result<f64> {
    check_aligned(p, dist)?;
    if theta.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: theta.len() });
    }
    Ok(p.vertices().iter().zip(&dist.probs).map(|(v, pi)| pi * dist_sq(v, theta)).sum())
}

/// `max_j R_∞(v_j)` and the smallest maximizing index. A convex quadratic
/// attains its maximum over a polytope at a vertex.
pub fn worst_case_limiting_risk(p: &ConvexPolytope, dist: &VertexDistribution) -> Result<(f64, usize)> {
    check_aligned(p, dist)?;
    let mut best = (f64::NEG_INFINITY, 0);
    for (j, v) in p.vertices().iter().enumerate() {
        let r = limiting_risk(p, v, dist)?;
        if r > best.0 {
            best = (r, j);
        }
    }
    Ok(best)
}

fn check_x(c: f64, x: f64) -> Result<ExampleGeometry> {
    ExampleGeometry::with_x(c, x)
}

/// `(p1, p2, px)` for `Θ_x`: `p2 = ¼ + arctan(1/c)/2π`, `px = ¼ − arctan(x)/2π`.
pub fn theta_x_vertex_probabilities(c: f64, x: f64) -> Result<[f64; 3]> {
    check_x(c, x)?;
    let p2 = 0.25 + (1.0 / c).atan() / (2.0 * PI);
    let px = 0.25 - x.atan() / (2.0 * PI);
    Ok([1.0 - p2 - px, p2, px])
}

/// `R_∞(v1; Θ_x) = α p2 + (1 + x²) px`; `α/2` on the segment `x = 1/c`.
pub fn theta_x_limiting_risk(c: f64, x: f64) -> Result<f64> {
    let g = check_x(c, x)?;
    if g.is_degenerate() {
        return Ok(0.5 * g.alpha());
    }
    let [_, p2, px] = theta_x_vertex_probabilities(c, x)?;
    Ok(g.alpha() * p2 + (1.0 + x * x) * px)
}

/// Change of the limiting risk at `v1` from `Θ_L` to `Θ_x`:
/// `Δ(x) = (1 + x²)/2π · (π/2 · x²/(1 + x²) − arctan x)`.
pub fn delta_x(c: f64, x: f64) -> Result<f64> {
    check_x(c, x)?;
    if x == 0.0 {
        return Err(Error::invalid("delta_x needs x > 0"));
    }
    let x2 = x * x;
    Ok((1.0 + x2) / (2.0 * PI) * (0.5 * PI * x2 / (1.0 + x2) - x.atan()))
}

/// Limiting risks at the three vertices of `Θ_x` and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopePoint {
    pub x: f64,
    pub risk_v1: f64,
    pub risk_v2: f64,
    pub risk_vx: f64,
    pub envelope: f64,
}

/// `[R_∞(v1), R_∞(v2), R_∞(vx)]` over `Θ_x`, `0 ≤ x < 1/c`.
pub fn theta_x_vertex_risks(c: f64, x: f64) -> Result<[f64; 3]> {
    let g = check_x(c, x)?;
    if g.is_degenerate() {
        return Err(Error::invalid("vertex risks need x < 1/c"));
    }
    let [p1, p2, px] = theta_x_vertex_probabilities(c, x)?;
    let alpha = g.alpha();
    let gap = (1.0 / c - x).powi(2);
    let lx = 1.0 + x * x;
    Ok([alpha * p2 + px * lx, alpha * p1 + px * gap, p1 * lx + p2 * gap])
}

/// Vertex risks and upper envelope on a grid of `x ∈ (0, 1/c)`.
pub fn envelope_curve(c: f64, x_grid: &[f64]) -> Result<Vec<EnvelopePoint>> {
    x_grid
        .iter()
        .map(|&x| {
            if x <= 0.0 {
                return Err(Error::invalid(format!("envelope grid must lie in (0, 1/c), got {x}")));
            }
            let [r1, r2, rx] = theta_x_vertex_risks(c, x)?;
            Ok(EnvelopePoint { x, risk_v1: r1, risk_v2: r2, risk_vx: rx, envelope: r1.max(r2).max(rx) })
        })
        .collect()
}

/// Grid point with the smallest envelope (first one on ties).
pub fn envelope_argmin(points: &[EnvelopePoint]) -> Option<EnvelopePoint> {
    points.iter().copied().reduce(|best, p| if p.envelope < best.envelope { p } else { best })
}

/// Estimated supremum risk of one polytope at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupRisk {
    pub sup: f64,
    pub stderr: f64,
    pub argmax: Vec<f64>,
}

/// Both suprema at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaComparison {
    pub sigma: f64,
    pub small: SupRisk,
    pub large: SupRisk,
    /// `4·√(se_small² + se_large²)`
    pub threshold: f64,
    pub reversal: bool,
}

/// Outcome of [`detect_finite_sigma_reversal`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversalReport {
    pub reversal_sigma: Option<f64>,
    pub comparisons: Vec<SigmaComparison>,
    pub edge_points: usize,
    pub n: u64,
    pub seed: u64,
}

/// Vertices plus `m` equally spaced interior points on every edge.
pub fn sup_search_candidates(p: &ConvexPolytope, m: usize) -> Vec<[f64; 2]> {
    let verts = p.planar_vertices();
    let mut out: Vec<[f64; 2]> = verts.to_vec();
    let k = verts.len();
    let edges = match k {
        1 => 0,
        2 => 1,
        _ => k,
    };
    for i in 0..edges {
        let (a, b) = (verts[i], verts[(i + 1) % k]);
        for j in 1..=m {
            let t = j as f64 / (m + 1) as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Smallest `σ` in `sigma_grid` at which the estimated worst-case risk over
/// `Θ_{x_small}` exceeds that over `Θ_{x_large}` by more than
/// [`REVERSAL_THRESHOLD_SE`] combined standard errors.
///
/// Suprema are maximized over [`sup_search_candidates`]. All candidates of
/// both sets share the same noise draws at each `σ`.
pub fn detect_finite_sigma_reversal(
    g_small: &ExampleGeometry,
    g_large: &ExampleGeometry,
    sigma_grid: &[f64],
    n: u64,
    seed: u64,
) -> Result<ReversalReport> {
    if g_small.c() != g_large.c() {
        return Err(Error::invalid("both sets must share the same c"));
    }
    let x_small = g_small.x().ok_or_else(|| Error::invalid("g_small needs x"))?;
    let x_large = g_large.x().ok_or_else(|| Error::invalid("g_large needs x"))?;
    if x_small < x_large {
        return Err(Error::invalid(format!(
            "sets are not nested: need x_small >= x_large, got {x_small} < {x_large}"
        )));
    }
    if sigma_grid.is_empty() {
        return Err(Error::invalid("sigma grid is empty"));
    }
    for w in sigma_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid("sigma grid must be strictly increasing"));
        }
    }
    for &s in sigma_grid {
        check_sigma(s)?;
    }
    let cfg = McConfig::new(n, seed)?;
    let small = g_small.theta_x();
    let large = g_large.theta_x();
    let cand_small = sup_search_candidates(&small, DEFAULT_EDGE_POINTS);
    let cand_large = sup_search_candidates(&large, DEFAULT_EDGE_POINTS);

    let mut comparisons = Vec::with_capacity(sigma_grid.len());
    let mut reversal_sigma = None;
    for &sigma in sigma_grid {
        let evals: Vec<LossEvaluator> = cand_small
            .iter()
            .map(|t| LossEvaluator::new(&small, t, sigma))
            .chain(cand_large.iter().map(|t| LossEvaluator::new(&large, t, sigma)))
            .collect();
        let estimates = estimate_many(&cfg, evals.len(), |sampler, index, out| {
            let z = [sampler.normal(), sampler.normal()];
            for (slot, e) in out.iter_mut().zip(&evals) {
                *slot = e.check(e.loss_planar(z), index)?;
            }
            Ok(())
        })?;
        let (est_small, est_large) = estimates.split_at(cand_small.len());
        let pick = |ests: &[RiskEstimate], cands: &[[f64; 2]]| {
            let (i, e) = ests
                .iter()
                .enumerate()
                .reduce(|a, b| if b.1.mean > a.1.mean { b } else { a })
                .expect("nonempty candidates");
            SupRisk { sup: e.mean, stderr: e.stderr, argmax: cands[i].to_vec() }
        };
        let s = pick(est_small, &cand_small);
        let l = pick(est_large, &cand_large);
        let threshold = REVERSAL_THRESHOLD_SE * (s.stderr.powi(2) + l.stderr.powi(2)).sqrt();
        let reversal = s.sup - l.sup > threshold;
        if reversal && reversal_sigma.is_none() {
            reversal_sigma = Some(sigma);
        }
        comparisons.push(SigmaComparison { sigma, small: s, large: l, threshold, reversal });
    }
    Ok(ReversalReport { reversal_sigma, comparisons, edge_points: DEFAULT_EDGE_POINTS, n, seed })
}
