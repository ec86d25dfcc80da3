//! One function per subcommand. Table commands return a [`Table`],
//! record commands a JSON value.

use std::path::Path;

use riskrev_core::asymptotics::{
    detect_finite_sigma_reversal, envelope_argmin, envelope_curve, statistical_dimension_2d,
    statistical_dimension_mc,
};
use riskrev_core::exact_risk::{risk_segment_exact, risk_triangle_exact};
use riskrev_core::geometry::{tangent_cone_2d, tangent_cone_generators, ConvexPolytope, ExampleGeometry};
use riskrev_core::montecarlo::{mc_risk_effective, McConfig};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::output::Table;
use crate::sweep::parse_list;
use crate::{Cli, DiffCurveArgs, EnvelopeArgs, HeatmapArgs, ReversalArgs, RiskArgs, SetKind, StatdimArgs};

pub const DIFF_CURVE_HEADER: &[&str] = &["c", "sigma", "risk_S", "risk_L", "diff"];
pub const HEATMAP_HEADER: &[&str] = &["c", "sigma", "diff"];
pub const ENVELOPE_HEADER: &[&str] = &["x", "risk_v1", "risk_v2", "risk_vx", "envelope"];

/// Largest grid `envelope --x-step` will build.
const MAX_ENVELOPE_POINTS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    DiffCurve,
    Heatmap,
    Envelope,
}

impl TableKind {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            TableKind::DiffCurve => DIFF_CURVE_HEADER,
            TableKind::Heatmap => HEATMAP_HEADER,
            TableKind::Envelope => ENVELOPE_HEADER,
        }
    }

    pub fn from_header(line: &str) -> Option<Self> {
        [TableKind::DiffCurve, TableKind::Heatmap, TableKind::Envelope]
            .into_iter()
            .find(|k| k.header().join(",") == line)
    }

    pub fn name(self) -> &'static str {
        match self {
            TableKind::DiffCurve => "diff-curve",
            TableKind::Heatmap => "heatmap",
            TableKind::Envelope => "envelope",
        }
    }
}

fn meta(kind: TableKind) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), kind.name().into());
    m
}

/// `[c, σ, R_S, R_L, R_S − R_L]` at `θ* = v1`.
pub fn diff_curve_row(c: f64, sigma: f64) -> Result<Vec<f64>, CliError> {
    let g = ExampleGeometry::new(c)?;
    let s = risk_segment_exact(&g, 0.0, sigma)?;
    let l = risk_triangle_exact(&g, sigma)?.total();
    Ok(vec![c, sigma, s, l, s - l])
}

pub fn heatmap_row(c: f64, sigma: f64) -> Result<Vec<f64>, CliError> {
    let r = diff_curve_row(c, sigma)?;
    Ok(vec![c, sigma, r[4]])
}

pub fn envelope_rows(c: f64, xs: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    Ok(envelope_curve(c, xs)?
        .into_iter()
        .map(|p| vec![p.x, p.risk_v1, p.risk_v2, p.risk_vx, p.envelope])
        .collect())
}

fn grid_rows(
    cs: &[f64],
    sigmas: &[f64],
    row: fn(f64, f64) -> Result<Vec<f64>, CliError>,
) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::with_capacity(cs.len() * sigmas.len());
    for &c in cs {
        for &s in sigmas {
            rows.push(row(c, s)?);
        }
    }
    Ok(rows)
}

pub fn diff_curve(a: &DiffCurveArgs, _cli: &Cli) -> Result<(TableKind, Table), CliError> {
    let kind = TableKind::DiffCurve;
    let rows = grid_rows(&a.c_list.values(), &a.sigma_sweep.values(), diff_curve_row)?;
    Ok((kind, Table { header: kind.header(), rows, meta: meta(kind) }))
}

pub fn heatmap(a: &HeatmapArgs, _cli: &Cli) -> Result<(TableKind, Table), CliError> {
    let kind = TableKind::Heatmap;
    let rows = grid_rows(&a.c_sweep.values(), &a.sigma_sweep.values(), heatmap_row)?;
    Ok((kind, Table { header: kind.header(), rows, meta: meta(kind) }))
}

/// `k·step` for `k ≥ 1` strictly below `1/c`.
pub fn step_grid(c: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::usage("--x-step must be positive"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(CliError::usage("--c must be positive"));
    }
    let top = 1.0 / c;
    if top / step > MAX_ENVELOPE_POINTS {
        return Err(CliError::usage("--x-step is too small"));
    }
    Ok((1..).map(|k| k as f64 * step).take_while(|&x| x < top).collect())
}

pub fn envelope(a: &EnvelopeArgs, _cli: &Cli) -> Result<(TableKind, Table), CliError> {
    let kind = TableKind::Envelope;
    let xs = match &a.x_sweep {
        Some(g) => g.values(),
        None => step_grid(a.c, a.x_step)?,
    };
    if xs.is_empty() {
        return Err(CliError::usage("x grid is empty"));
    }
    let points = envelope_curve(a.c, &xs)?;
    let best = envelope_argmin(&points).expect("grid is nonempty");
    let rows = points.iter().map(|p| vec![p.x, p.risk_v1, p.risk_v2, p.risk_vx, p.envelope]).collect();
    let mut m = meta(kind);
    m.insert("c".into(), a.c.into());
    m.insert("argmin_x".into(), best.x.into());
    m.insert("min_envelope".into(), best.envelope.into());
    m.insert("points".into(), xs.len().into());
    Ok((kind, Table { header: kind.header(), rows, meta: m }))
}

fn load_polytope(path: &Path) -> Result<ConvexPolytope, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(ConvexPolytope::from_json(&text)?)
}

fn require_c(c: Option<f64>) -> Result<f64, CliError> {
    c.ok_or_else(|| CliError::usage("--c is required for the built-in sets"))
}

pub fn risk(a: &RiskArgs, cli: &Cli) -> Result<Value, CliError> {
    let sigma_eff = a.sigma / (cli.n_obs as f64).sqrt();
    let mut out = Map::new();
    let (polytope, theta, exact) = match a.set {
        SetKind::Segment | SetKind::Triangle => {
            if a.file.is_some() || a.theta.is_some() {
                return Err(CliError::usage("--file and --theta only apply to --set polytope-file"));
            }
            let c = require_c(a.c)?;
            let g = ExampleGeometry::new(c)?;
            out.insert("c".into(), c.into());
            if a.set == SetKind::Segment {
                let t = a.t_star.unwrap_or(0.0);
                let v2 = g.v2();
                let exact = risk_segment_exact(&g, t, sigma_eff)?;
                out.insert("t_star".into(), t.into());
                (g.segment(), vec![t * v2[0], t * v2[1]], Some(exact))
            } else {
                if a.t_star.is_some() {
                    return Err(CliError::usage("--t-star only applies to --set segment"));
                }
                let exact = risk_triangle_exact(&g, sigma_eff)?.total();
                (g.triangle(), g.v1().to_vec(), Some(exact))
            }
        }
        SetKind::PolytopeFile => {
            if a.c.is_some() || a.t_star.is_some() {
                return Err(CliError::usage("--c and --t-star do not apply to --set polytope-file"));
            }
            let path = a.file.as_ref().ok_or_else(|| CliError::usage("--set polytope-file needs --file"))?;
            let theta = a.theta.as_deref().ok_or_else(|| CliError::usage("--set polytope-file needs --theta"))?;
            if !a.mc {
                return Err(CliError::usage("no closed form for a polytope file; pass --mc"));
            }
            (load_polytope(path)?, parse_list(theta)?, None)
        }
    };
    if let Some(e) = exact {
        out.insert("exact".into(), e.into());
    }
    if a.mc {
        let cfg = McConfig::new(cli.samples, cli.seed)?;
        let est = mc_risk_effective(&polytope, &theta, a.sigma, cli.n_obs, &cfg)?;
        out.insert("mc_mean".into(), est.mean.into());
        out.insert("mc_stderr".into(), est.stderr.into());
        out.insert("samples".into(), est.n.into());
    } else if !polytope.contains(&theta)? {
        return Err(CliError::usage("θ* lies outside the set"));
    }
    let set = match a.set {
        SetKind::Segment => "segment",
        SetKind::Triangle => "triangle",
        SetKind::PolytopeFile => "polytope-file",
    };
    out.insert("set".into(), set.into());
    out.insert("theta_star".into(), json!(theta));
    out.insert("sigma".into(), a.sigma.into());
    out.insert("sigma_effective".into(), sigma_eff.into());
    out.insert("n_obs".into(), cli.n_obs.into());
    out.insert("seed".into(), cli.seed.into());
    Ok(Value::Object(out))
}

fn parse_generators(s: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let gens = s.split(';').map(parse_list).collect::<Result<Vec<_>, _>>()?;
    let d = gens[0].len();
    if gens.iter().any(|g| g.len() != d) {
        return Err(CliError::usage("all generators need the same dimension"));
    }
    Ok(gens)
}

fn statdim_mc(gens: &[Vec<f64>], cli: &Cli) -> Result<Value, CliError> {
    let est = statistical_dimension_mc(gens, cli.samples, cli.seed)?;
    Ok(json!({
        "delta": est.mean,
        "stderr": est.stderr,
        "method": "monte_carlo",
        "samples": est.n,
        "seed": cli.seed,
    }))
}

pub fn statdim(a: &StatdimArgs, cli: &Cli) -> Result<Value, CliError> {
    if let Some(g) = &a.generators {
        return statdim_mc(&parse_generators(g)?, cli);
    }
    let polytope = match (&a.polytope_file, a.set) {
        (Some(path), None) => load_polytope(path)?,
        (None, Some(SetKind::Segment)) => ExampleGeometry::new(require_c(a.c)?)?.segment(),
        (None, Some(SetKind::Triangle)) => ExampleGeometry::new(require_c(a.c)?)?.triangle(),
        (None, Some(SetKind::PolytopeFile)) => {
            return Err(CliError::usage("use --polytope-file <PATH> to read a polytope"))
        }
        _ => return Err(CliError::usage("give one of --polytope-file, --set or --generators")),
    };
    let theta = parse_list(a.theta.as_deref().ok_or_else(|| CliError::usage("--theta is required"))?)?;
    if polytope.dim() == 2 && !a.mc {
        let cone = tangent_cone_2d(&polytope, &theta)?;
        return Ok(json!({
            "delta": statistical_dimension_2d(&cone),
            "method": "analytic",
            "cone": format!("{:?}", cone.kind()).to_lowercase(),
            "apex_angle": cone.apex_angle(),
        }));
    }
    let gens = tangent_cone_generators(&polytope, &theta)?;
    if gens.is_empty() {
        return Ok(json!({ "delta": 0.0, "method": "analytic", "cone": "point" }));
    }
    statdim_mc(&gens, cli)
}

pub fn reversal(a: &ReversalArgs, cli: &Cli) -> Result<Value, CliError> {
    if a.x_small <= a.x_large {
        return Err(CliError::usage(format!(
            "Θ_x sets are nested only for x-small > x-large, got {} <= {}",
            a.x_small, a.x_large
        )));
    }
    let small = ExampleGeometry::with_x(a.c, a.x_small)?;
    let large = ExampleGeometry::with_x(a.c, a.x_large)?;
    let sigmas = a.sigma_sweep.values();
    let report = detect_finite_sigma_reversal(&small, &large, &sigmas, cli.samples, cli.seed)?;
    let col = |f: &dyn Fn(&riskrev_core::asymptotics::SigmaComparison) -> Value| -> Value {
        Value::Array(report.comparisons.iter().map(f).collect())
    };
    Ok(json!({
        "c": a.c,
        "x_small": a.x_small,
        "x_large": a.x_large,
        "reversal_sigma": report.reversal_sigma,
        "sigma": col(&|r| r.sigma.into()),
        "sup_small": col(&|r| r.small.sup.into()),
        "sup_large": col(&|r| r.large.sup.into()),
        "stderr_small": col(&|r| r.small.stderr.into()),
        "stderr_large": col(&|r| r.large.stderr.into()),
        "argmax_small": col(&|r| json!(r.small.argmax)),
        "argmax_large": col(&|r| json!(r.large.argmax)),
        "threshold": col(&|r| r.threshold.into()),
        "reversal": col(&|r| r.reversal.into()),
        "edge_points": report.edge_points,
        "samples": report.n,
        "seed": report.seed,
    }))
}
