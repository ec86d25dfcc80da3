//! Convex polytopes given by vertices, Euclidean projections onto them, and
//! the cones attached to their points.
//!
//! Three projectors are provided and cross-checked against each other in the
//! tests: a closed-form region table for the triangle `Θ_L` of
//! [`ExampleGeometry`], an exact planar projector for any convex polygon, and
//! Wolfe's min-norm-point method for arbitrary dimension.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default certificate tolerance for [`project_polytope`].
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-10;

/// Tolerance for deciding `θ ∈ P`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

const WOLFE_MAX_MAJOR: usize = 1000;
const WOLFE_MAX_MINOR: usize = 1000;
const NNLS_MAX_ITER_FACTOR: usize = 10;

/// `conv{v_1, …, v_K}` in `R^d`.
///
/// Planar inputs are reduced to their extreme points and stored
/// counterclockwise, starting from the extreme point that appears first in
/// the input. Inputs that are already extreme and counterclockwise therefore
/// keep their order. Vertices in other dimensions are stored as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeFile", into = "PolytopeFile")]
pub struct ConvexPolytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    planar: Vec<[f64; 2]>,
}

/// Interchange form `{"dim": d, "vertices": [[..], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PolytopeFile {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

impl TryFrom<PolytopeFile> for ConvexPolytope {
    type Error = Error;

    fn try_from(file: PolytopeFile) -> Result<Self> {
        ConvexPolytope::with_dim(file.dim, file.vertices)
    }
}

impl From<ConvexPolytope> for PolytopeFile {
    fn from(p: ConvexPolytope) -> Self {
        PolytopeFile { dim: p.dim, vertices: p.vertices }
    }
}

impl ConvexPolytope {
    /// Builds a polytope, inferring `d` from the first vertex.
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("polytope needs at least one vertex"))?;
        Self::with_dim(dim, vertices)
    }

    pub fn with_dim(dim: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("polytope dimension must be positive"));
        }
        if vertices.is_empty() {
            return Err(Error::invalid("polytope needs at least one vertex"));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("vertex coordinates must be finite"));
            }
        }
        for i in 0..vertices.len() {
            for j in 0..i {
                if vertices[i] == vertices[j] {
                    return Err(Error::invalid(format!("duplicate vertex at indices {j} and {i}")));
                }
            }
        }
        if dim != 2 {
            return Ok(Self { dim, vertices, planar: Vec::new() });
        }
        let planar = convex_hull_ccw(&vertices);
        let vertices = planar.iter().map(|p| p.to_vec()).collect();
        Ok(Self { dim, vertices, planar })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("polytope file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polytope serialization cannot fail")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Vertices as fixed-size pairs; empty unless `d = 2`.
    pub fn planar_vertices(&self) -> &[[f64; 2]] {
        &self.planar
    }

    /// Squared diameter `max_{i,j} ‖v_i − v_j‖²`.
    pub fn diameter_sq(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[..i] {
                best = best.max(dist_sq(a, b));
            }
        }
        best
    }

    /// Distance from `y` to the polytope.
    pub fn distance(&self, y: &[f64]) -> Result<f64> {
        let q = project(self, y)?;
        Ok(dist_sq(&q, y).sqrt())
    }

    /// `θ ∈ P` up to [`MEMBERSHIP_TOL`].
    pub fn contains(&self, theta: &[f64]) -> Result<bool> {
        Ok(self.distance(theta)? <= MEMBERSHIP_TOL)
    }

    pub(crate) fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(())
    }

    pub(crate) fn require_member(&self, theta: &[f64]) -> Result<()> {
        self.check_dim(theta)?;
        let distance = self.distance(theta)?;
        if distance > MEMBERSHIP_TOL {
            return Err(Error::OutsidePolytope { distance });
        }
        Ok(())
    }
}

/// The parametric family `v1 = (0,0)`, `v2 = (1/c, 1)`, `v3 = (0,1)`,
/// `vx = (x, 1)`, with `Θ_S = [v1, v2]`, `Θ_L = conv{v1, v2, v3}` and
/// `Θ_x = conv{v1, v2, vx}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleGeometry {
    c: f64,
    x: Option<f64>,
}

impl ExampleGeometry {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("c must be finite and > 0, got {c}")));
        }
        Ok(Self { c, x: None })
    }

    pub fn with_x(c: f64, x: f64) -> Result<Self> {
        Self::new(c)?;
        if !(x.is_finite() && (0.0..=1.0 / c).contains(&x)) {
            return Err(Error::invalid(format!("x must lie in [0, 1/c] = [0, {}], got {x}", 1.0 / c)));
        }
        Ok(Self { c, x: Some(x) })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn x(&self) -> Option<f64> {
        self.x
    }

    /// `α_c = 1 + 1/c² = ‖v2‖²`.
    pub fn alpha(&self) -> f64 {
        1.0 + 1.0 / (self.c * self.c)
    }

    pub fn v1(&self) -> [f64; 2] {
        [0.0, 0.0]
    }

    pub fn v2(&self) -> [f64; 2] {
        [1.0 / self.c, 1.0]
    }

    pub fn v3(&self) -> [f64; 2] {
        [0.0, 1.0]
    }

    /// `(x, 1)`; `v3` when `x` is absent.
    pub fn vx(&self) -> [f64; 2] {
        [self.x.unwrap_or(0.0), 1.0]
    }

    /// True when `x = 1/c`, where `Θ_x` collapses onto `Θ_S`.
    pub fn is_degenerate(&self) -> bool {
        matches!(self.x, Some(x) if (x - 1.0 / self.c).abs() <= 1e-12 * (1.0 / self.c).max(1.0))
    }

    /// `Θ_S` as a two-vertex polytope.
    pub fn segment(&self) -> ConvexPolytope {
        ConvexPolytope::with_dim(2, vec![self.v1().to_vec(), self.v2().to_vec()])
            .expect("segment vertices are distinct")
    }

    /// `Θ_L`.
    pub fn triangle(&self) -> ConvexPolytope {
        ConvexPolytope::with_dim(2, vec![self.v1().to_vec(), self.v2().to_vec(), self.v3().to_vec()])
            .expect("triangle vertices are distinct")
    }

    /// `Θ_x` (or `Θ_L` when `x` is absent). At `x = 1/c` this is `Θ_S`.
    pub fn theta_x(&self) -> ConvexPolytope {
        if self.is_degenerate() {
            return self.segment();
        }
        ConvexPolytope::with_dim(2, vec![self.v1().to_vec(), self.v2().to_vec(), self.vx().to_vec()])
            .expect("Θ_x vertices are distinct for x < 1/c")
    }
}

/// Regions of the plane on which the projection onto `Θ_L` has a single
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionLabel {
    Interior,
    A1,
    A2,
    A3,
    A12,
    A13,
    A23,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 7] = [
        RegionLabel::Interior,
        RegionLabel::A1,
        RegionLabel::A2,
        RegionLabel::A3,
        RegionLabel::A12,
        RegionLabel::A13,
        RegionLabel::A23,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            RegionLabel::Interior => "Interior",
            RegionLabel::A1 => "A1",
            RegionLabel::A2 => "A2",
            RegionLabel::A3 => "A3",
            RegionLabel::A12 => "A12",
            RegionLabel::A13 => "A13",
            RegionLabel::A23 => "A23",
        }
    }
}

/// Shape of a planar tangent cone.
///
/// `Line` arises at relative-interior points of a segment, which the five
/// textbook cases do not cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    Point,
    Ray,
    Line,
    Wedge,
    Halfplane,
    Full,
}

/// A closed convex cone in the plane, described by its kind and the arc
/// measure of its directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone2D {
    kind: ConeKind,
    apex_angle: f64,
}

impl Cone2D {
    pub fn point() -> Self {
        Self { kind: ConeKind::Point, apex_angle: 0.0 }
    }

    pub fn ray() -> Self {
        Self { kind: ConeKind::Ray, apex_angle: 0.0 }
    }

    pub fn line() -> Self {
        Self { kind: ConeKind::Line, apex_angle: 0.0 }
    }

    pub fn halfplane() -> Self {
        Self { kind: ConeKind::Halfplane, apex_angle: PI }
    }

    pub fn full() -> Self {
        Self { kind: ConeKind::Full, apex_angle: 2.0 * PI }
    }

    /// Wedge with opening angle in `(0, π)`.
    pub fn wedge(angle: f64) -> Result<Self> {
        if !(angle > 0.0 && angle < PI) {
            return Err(Error::invalid(format!("wedge angle must lie in (0, π), got {angle}")));
        }
        Ok(Self { kind: ConeKind::Wedge, apex_angle: angle })
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn apex_angle(&self) -> f64 {
        self.apex_angle
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; collinear and interior points are dropped.
fn convex_hull_ccw(vertices: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let pts: Vec<[f64; 2]> = vertices.iter().map(|v| [v[0], v[1]]).collect();
    if pts.len() <= 2 {
        return pts;
    }
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&i, &j| pts[i][0].total_cmp(&pts[j][0]).then(pts[i][1].total_cmp(&pts[j][1])));

    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs())).max(1.0);
    let eps = 1e-14 * scale * scale;
    let turn = |hull: &[usize], k: usize| {
        let n = hull.len();
        cross2(pts[hull[n - 2]], pts[hull[n - 1]], pts[k]) <= eps
    };

    let mut hull: Vec<usize> = Vec::with_capacity(2 * pts.len());
    for &k in &order {
        while hull.len() >= 2 && turn(&hull, k) {
            hull.pop();
        }
        hull.push(k);
    }
    let lower_len = hull.len() + 1;
    for &k in order.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(&hull, k) {
            hull.pop();
        }
        hull.push(k);
    }
    hull.pop();

    if hull.len() == 2 {
        // collinear input: keep the two extremes in input order
        hull.sort_unstable();
    } else {
        let start = (0..hull.len()).min_by_key(|&i| hull[i]).unwrap_or(0);
        hull.rotate_left(start);
    }
    hull.into_iter().map(|i| pts[i]).collect()
}

/// Projection onto the segment `[v_start, v_end]`:
/// `v_start + clip(t, 0, 1)(v_end − v_start)`.
pub fn project_segment(v_start: &[f64], v_end: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if v_start.len() != v_end.len() {
        return Err(Error::DimensionMismatch { expected: v_start.len(), got: v_end.len() });
    }
    if y.len() != v_start.len() {
        return Err(Error::DimensionMismatch { expected: v_start.len(), got: y.len() });
    }
    let len_sq = dist_sq(v_start, v_end);
    if len_sq == 0.0 {
        return Err(Error::invalid("degenerate segment: endpoints coincide"));
    }
    let num: f64 = (0..y.len()).map(|k| (y[k] - v_start[k]) * (v_end[k] - v_start[k])).sum();
    let t = (num / len_sq).clamp(0.0, 1.0);
    Ok((0..y.len()).map(|k| v_start[k] + t * (v_end[k] - v_start[k])).collect())
}

#[inline]
fn project_segment_2d(a: [f64; 2], b: [f64; 2], y: [f64; 2]) -> [f64; 2] {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((y[0] - a[0]) * dx + (y[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    [a[0] + t * dx, a[1] + t * dy]
}

/// Exact projection onto a convex polygon with counterclockwise vertices.
pub(crate) fn project_planar(verts: &[[f64; 2]], y: [f64; 2]) -> [f64; 2] {
    match verts.len() {
        0 => unreachable!("polytopes are nonempty"),
        1 => verts[0],
        2 => project_segment_2d(verts[0], verts[1], y),
        k => {
            let inside = (0..k).all(|i| cross2(verts[i], verts[(i + 1) % k], y) >= 0.0);
            if inside {
                return y;
            }
            let mut best = verts[0];
            let mut best_d = f64::INFINITY;
            for i in 0..k {
                let q = project_segment_2d(verts[i], verts[(i + 1) % k], y);
                let d = (q[0] - y[0]).powi(2) + (q[1] - y[1]).powi(2);
                if d < best_d {
                    best_d = d;
                    best = q;
                }
            }
            best
        }
    }
}

/// Exact projection onto a planar polytope.
pub fn project_polygon_2d(p: &ConvexPolytope, y: &[f64]) -> Result<[f64; 2]> {
    if p.dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: p.dim });
    }
    p.check_dim(y)?;
    Ok(project_planar(&p.planar, [y[0], y[1]]))
}

/// Region-table projection onto `Θ_L`. Boundary points are labelled with
/// precedence Interior, then edges, then vertices.
pub fn project_triangle_example(g: &ExampleGeometry, y: &[f64]) -> Result<([f64; 2], RegionLabel)> {
    if g.x.is_some() {
        return Err(Error::invalid("region table applies to Θ_L only; x must be absent"));
    }
    if y.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: y.len() });
    }
    if !(y[0].is_finite() && y[1].is_finite()) {
        return Err(Error::invalid("point coordinates must be finite"));
    }
    Ok(project_triangle_table(g.c, [y[0], y[1]]))
}

pub(crate) fn project_triangle_table(c: f64, y: [f64; 2]) -> ([f64; 2], RegionLabel) {
    let [y1, y2] = y;
    let inv_c = 1.0 / c;
    let w = y2 - c * y1;
    let s = (y1 + c * y2) / (1.0 + c * c);
    if y1 >= 0.0 && y2 <= 1.0 && w >= 0.0 {
        (y, RegionLabel::Interior)
    } else if w <= 0.0 && (0.0..=inv_c).contains(&s) {
        ([s, c * s], RegionLabel::A12)
    } else if y1 <= 0.0 && (0.0..=1.0).contains(&y2) {
        ([0.0, y2], RegionLabel::A13)
    } else if (0.0..=inv_c).contains(&y1) && y2 >= 1.0 {
        ([y1, 1.0], RegionLabel::A23)
    } else if y2 <= 0.0 && s <= 0.0 {
        ([0.0, 0.0], RegionLabel::A1)
    } else if y1 >= inv_c && s >= inv_c {
        ([inv_c, 1.0], RegionLabel::A2)
    } else if y1 <= 0.0 && y2 >= 1.0 {
        ([0.0, 1.0], RegionLabel::A3)
    } else {
        // Only reachable through rounding on a region boundary.
        let edges = [
            ([0.0, 0.0], [inv_c, 1.0], RegionLabel::A12),
            ([0.0, 0.0], [0.0, 1.0], RegionLabel::A13),
            ([0.0, 1.0], [inv_c, 1.0], RegionLabel::A23),
        ];
        edges
            .iter()
            .map(|&(a, b, label)| {
                let q = project_segment_2d(a, b, y);
                ((q[0] - y1).powi(2) + (q[1] - y2).powi(2), q, label)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, q, label)| (q, label))
            .expect("three candidates")
    }
}

/// Projection by Wolfe's min-norm-point method on `{v_i − y}`.
///
/// The result `q` is certified by the variational-inequality residual
/// `max_i ⟨y − q, v_i − q⟩ ≤ tol·(1 + ‖y‖)`; if that fails after the
/// iteration cap, [`Error::NonConvergence`] reports the residual.
pub fn project_polytope(p: &ConvexPolytope, y: &[f64], tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    p.check_dim(y)?;
    let shifted: Vec<Vec<f64>> = p
        .vertices
        .iter()
        .map(|v| v.iter().zip(y).map(|(a, b)| a - b).collect())
        .collect();
    let x = min_norm_point(&shifted)?;
    let q: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let residual = vi_residual(p, y, &q);
    let bound = tol * (1.0 + dot(y, y).sqrt());
    if residual > bound {
        return Err(Error::NonConvergence { what: "min-norm point", iterations: WOLFE_MAX_MAJOR, residual });
    }
    Ok(q)
}

/// `max_i ⟨y − q, v_i − q⟩`, zero exactly at the projection.
pub fn vi_residual(p: &ConvexPolytope, y: &[f64], q: &[f64]) -> f64 {
    p.vertices
        .iter()
        .map(|v| (0..y.len()).map(|k| (y[k] - q[k]) * (v[k] - q[k])).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Fastest exact projector available for `p`.
pub fn project(p: &ConvexPolytope, y: &[f64]) -> Result<Vec<f64>> {
    p.check_dim(y)?;
    match (p.dim, p.vertices.len()) {
        (_, 1) => Ok(p.vertices[0].clone()),
        (_, 2) => project_segment(&p.vertices[0], &p.vertices[1], y),
        (2, _) => Ok(project_planar(&p.planar, [y[0], y[1]]).to_vec()),
        _ => project_polytope(p, y, DEFAULT_PROJECTION_TOL),
    }
}

/// Minimum-norm point of `conv(points)` (Wolfe 1976).
fn min_norm_point(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = points[0].len();
    let norms: Vec<f64> = points.iter().map(|p| dot(p, p)).collect();
    let scale = norms.iter().cloned().fold(0.0, f64::max);
    let stop = 1e-15 * (1.0 + scale);
    let weight_eps = 1e-14;

    let start = (0..points.len()).min_by(|&a, &b| norms[a].total_cmp(&norms[b])).unwrap_or(0);
    let mut active = vec![start];
    let mut lambda = vec![1.0];
    let mut x = points[start].clone();

    let combine = |active: &[usize], weights: &[f64]| {
        let mut out = vec![0.0; d];
        for (&i, &w) in active.iter().zip(weights) {
            for k in 0..d {
                out[k] += w * points[i][k];
            }
        }
        out
    };

    for _ in 0..WOLFE_MAX_MAJOR {
        let xx = dot(&x, &x);
        let (j, xp) = (0..points.len())
            .map(|i| (i, dot(&x, &points[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if xx - xp <= stop || active.contains(&j) {
            return Ok(x);
        }
        active.push(j);
        lambda.push(0.0);

        let mut converged_minor = false;
        for _ in 0..WOLFE_MAX_MINOR {
            let mu = affine_min_norm(points, &active);
            if mu.iter().all(|&m| m > weight_eps) {
                lambda = mu;
                converged_minor = true;
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lambda.iter().zip(&mu) {
                if *m <= weight_eps {
                    let denom = l - m;
                    if denom > 0.0 {
                        theta = theta.min(l / denom);
                    }
                }
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l = (1.0 - theta) * *l + theta * m;
            }
            let mut k = 0;
            while k < active.len() {
                if lambda[k] <= weight_eps {
                    active.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            if active.len() == 1 {
                lambda[0] = 1.0;
                converged_minor = true;
                break;
            }
        }
        if !converged_minor {
            let xx = dot(&x, &x);
            let xp = points.iter().map(|p| dot(&x, p)).fold(f64::INFINITY, f64::min);
            return Err(Error::NonConvergence {
                what: "min-norm point (minor cycle)",
                iterations: WOLFE_MAX_MINOR,
                residual: xx - xp,
            });
        }
        x = combine(&active, &lambda);
    }
    let xx = dot(&x, &x);
    let xp = points.iter().map(|p| dot(&x, p)).fold(f64::INFINITY, f64::min);
    Err(Error::NonConvergence { what: "min-norm point", iterations: WOLFE_MAX_MAJOR, residual: xx - xp })
}

/// Affine weights `μ` (summing to one) minimizing `‖Σ μ_i p_i‖` over the
/// active set, from the bordered Gram system.
fn affine_min_norm(points: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let k = active.len();
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..=a {
            let g = dot(&points[active[a]], &points[active[b]]);
            m[(a, b)] = g;
            m[(b, a)] = g;
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = m
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .or_else(|| m.svd(true, true).solve(&rhs, 1e-13).ok())
        .unwrap_or_else(|| {
            let mut uniform = DVector::from_element(k + 1, 1.0 / k as f64);
            uniform[k] = 0.0;
            uniform
        });
    sol.iter().take(k).cloned().collect()
}

/// Index of the vertex maximizing `⟨v_i, u⟩`; ties go to the smallest index.
pub fn exposed_face_vertex(p: &ConvexPolytope, u: &[f64]) -> Result<usize> {
    p.check_dim(u)?;
    if u.iter().all(|&x| x == 0.0) {
        return Err(Error::invalid("direction must be nonzero"));
    }
    Ok(argmax_vertex(&p.vertices, u))
}

#[inline]
pub(crate) fn argmax_vertex(vertices: &[Vec<f64>], u: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in vertices.iter().enumerate() {
        let val = dot(v, u);
        if val > best_val {
            best_val = val;
            best = i;
        }
    }
    best
}

fn require_planar(p: &ConvexPolytope) -> Result<()> {
    if p.dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: p.dim });
    }
    Ok(())
}

/// Interior angle of a convex polygon at vertex `i` (`K ≥ 3`).
fn interior_angle(verts: &[[f64; 2]], i: usize) -> f64 {
    let k = verts.len();
    let v = verts[i];
    let prev = verts[(i + k - 1) % k];
    let next = verts[(i + 1) % k];
    let a = [prev[0] - v[0], prev[1] - v[1]];
    let b = [next[0] - v[0], next[1] - v[1]];
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.abs().atan2(dot)
}

/// Arc length of `N_P(v_i) ∩ S¹`: `π` minus the interior angle at `v_i`.
/// Segment endpoints get `π`, a single point `2π`.
pub fn normal_cone_angle_2d(p: &ConvexPolytope, i: usize) -> Result<f64> {
    require_planar(p)?;
    let k = p.planar.len();
    if i >= k {
        return Err(Error::invalid(format!(
            "vertex index {i} out of range; polytope has {k} extreme vertices"
        )));
    }
    Ok(match k {
        1 => 2.0 * PI,
        2 => PI,
        _ => PI - interior_angle(&p.planar, i),
    })
}

/// Tangent cone of a planar polytope at `θ ∈ P`.
pub fn tangent_cone_2d(p: &ConvexPolytope, theta: &[f64]) -> Result<Cone2D> {
    require_planar(p)?;
    p.require_member(theta)?;
    let t = [theta[0], theta[1]];
    let near = |v: [f64; 2]| ((v[0] - t[0]).powi(2) + (v[1] - t[1]).powi(2)).sqrt() <= MEMBERSHIP_TOL;
    let verts = &p.planar;
    match verts.len() {
        1 => Ok(Cone2D::point()),
        2 => Ok(if verts.iter().any(|&v| near(v)) { Cone2D::ray() } else { Cone2D::line() }),
        k => {
            if let Some(i) = (0..k).find(|&i| near(verts[i])) {
                return Cone2D::wedge(interior_angle(verts, i));
            }
            let on_edge = (0..k).any(|i| {
                let q = project_segment_2d(verts[i], verts[(i + 1) % k], t);
                near(q)
            });
            Ok(if on_edge { Cone2D::halfplane() } else { Cone2D::full() })
        }
    }
}

/// Nonzero generators `{v_i − θ}` of the tangent cone `T_P(θ)`.
pub fn tangent_cone_generators(p: &ConvexPolytope, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
    p.require_member(theta)?;
    Ok(p.vertices
        .iter()
        .map(|v| v.iter().zip(theta).map(|(a, b)| a - b).collect::<Vec<f64>>())
        .filter(|g| dot(g, g).sqrt() > MEMBERSHIP_TOL)
        .collect())
}

/// Projection of `z` onto the cone `{Σ λ_j g_j : λ ≥ 0}` by Lawson–Hanson
/// nonnegative least squares.
///
/// Generators are normalized first. Success requires the KKT residual
/// `max_j ⟨g_j, z − Gλ⟩⁺` to be at most `tol·(1 + ‖z‖)`.
pub fn project_cone_nonneg(generators: &[Vec<f64>], z: &[f64], tol: f64) -> Result<Vec<f64>> {
    if generators.is_empty() {
        return Err(Error::invalid("cone needs at least one generator"));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let d = z.len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(generators.len());
    for g in generators {
        if g.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.len() });
        }
        let n = dot(g, g).sqrt();
        if !n.is_finite() {
            return Err(Error::invalid("generator coordinates must be finite"));
        }
        if n > 0.0 {
            cols.push(g.iter().map(|x| x / n).collect());
        }
    }
    if z.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("point coordinates must be finite"));
    }
    if cols.is_empty() {
        return Ok(vec![0.0; d]);
    }
    let g = DMatrix::from_fn(d, cols.len(), |r, c| cols[c][r]);
    let zv = DVector::from_column_slice(z);
    let bound = tol * (1.0 + zv.norm());
    let lambda = nnls(&g, &zv, bound)?;
    Ok((&g * lambda).iter().cloned().collect())
}

fn nnls(g: &DMatrix<f64>, z: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    let m = g.ncols();
    let mut lambda = DVector::<f64>::zeros(m);
    let mut passive = vec![false; m];
    let max_iter = NNLS_MAX_ITER_FACTOR * (m + 3);
    let gradient = |lambda: &DVector<f64>| g.transpose() * (z - g * lambda);
    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
        let sub = g.select_columns(&idx);
        let s = sub.svd(true, true).solve(z, 1e-12).unwrap_or_else(|_| DVector::zeros(idx.len()));
        let mut full = DVector::<f64>::zeros(m);
        for (k, &j) in idx.iter().enumerate() {
            full[j] = s[k];
        }
        full
    };

    let mut w = gradient(&lambda);
    for _ in 0..max_iter {
        let candidate = (0..m)
            .filter(|&j| !passive[j])
            .max_by(|&a, &b| w[a].total_cmp(&w[b]))
            .filter(|&j| w[j] > tol);
        let Some(j) = candidate else {
            return Ok(lambda);
        };
        passive[j] = true;
        let mut s = solve_passive(&passive);
        let mut guard = 0;
        while (0..m).any(|k| passive[k] && s[k] <= 0.0) {
            guard += 1;
            if guard > m + 1 {
                break;
            }
            let mut alpha = 1.0f64;
            for k in 0..m {
                if passive[k] && s[k] <= 0.0 {
                    let denom = lambda[k] - s[k];
                    if denom > 0.0 {
                        alpha = alpha.min(lambda[k] / denom);
                    }
                }
            }
            lambda = &lambda + (&s - &lambda) * alpha;
            for k in 0..m {
                if passive[k] && lambda[k] <= 1e-15 {
                    passive[k] = false;
                    lambda[k] = 0.0;
                }
            }
            s = solve_passive(&passive);
        }
        lambda = s.map(|v| v.max(0.0));
        w = gradient(&lambda);
    }
    let residual = w.iter().cloned().fold(0.0f64, f64::max);
    if residual <= tol {
        Ok(lambda)
    } else {
        Err(Error::NonConvergence { what: "nonnegative least squares", iterations: max_iter, residual })
    }
}
