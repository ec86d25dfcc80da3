//! Command-line front end: risk tables, noise sweeps, envelopes and
//! reversal searches as CSV or JSON.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod error;
pub mod output;
pub mod plot;
pub mod sweep;
pub mod verify;

pub use error::CliError;
pub use output::Format;
pub use sweep::{Grid, Scale, SweepSpec};

pub const DEFAULT_SEED: u64 = 20240613;
pub const DEFAULT_SAMPLES: u64 = 100_000;

/// Variable that caps the worker count.
pub const THREADS_ENV: &str = "RISKREV_THREADS";

#[derive(Debug, Parser)]
#[command(name = "riskrev", version, about = "Risk of projection estimators onto convex polytopes")]
pub struct Cli {
    /// Seed for every Monte Carlo stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Monte Carlo sample count per estimate.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    pub samples: u64,

    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Output format. Tables default to CSV, records are always JSON.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Number of averaged observations; the noise level becomes σ/√n.
    #[arg(long = "n-obs", global = true, default_value_t = 1)]
    pub n_obs: u64,

    /// Also write a matplotlib script next to the CSV given by --out.
    #[arg(long, global = true)]
    pub emit_plot_script: bool,

    /// Re-check a CSV written by this tool.
    #[arg(long, value_name = "CSV")]
    pub verify: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact and/or Monte Carlo risk at one noise level.
    Risk(RiskArgs),
    /// Risk difference R(Θ_S) − R(Θ_L) against σ for several c.
    DiffCurve(DiffCurveArgs),
    /// Risk difference on a (c, σ) grid.
    Heatmap(HeatmapArgs),
    /// Limiting vertex risks over Θ_x and their upper envelope.
    Envelope(EnvelopeArgs),
    /// Statistical dimension of a tangent cone.
    Statdim(StatdimArgs),
    /// Search for a finite-σ worst-case risk reversal between Θ_x sets.
    Reversal(ReversalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetKind {
    Segment,
    Triangle,
    PolytopeFile,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[arg(long = "set", value_enum)]
    pub set: SetKind,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub sigma: f64,
    /// Position of θ* on the segment, θ* = t·v2.
    #[arg(long = "t-star")]
    pub t_star: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
    /// θ* for a polytope file, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Add a Monte Carlo estimate.
    #[arg(long)]
    pub mc: bool,
}

#[derive(Debug, Args)]
pub struct DiffCurveArgs {
    #[arg(long = "c-list")]
    pub c_list: Grid,
    #[arg(long = "sigma-sweep")]
    pub sigma_sweep: Grid,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long = "c-sweep")]
    pub c_sweep: Grid,
    #[arg(long = "sigma-sweep")]
    pub sigma_sweep: Grid,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[arg(long)]
    pub c: f64,
    /// Explicit x grid inside (0, 1/c).
    #[arg(long = "x-sweep", conflicts_with = "x_step")]
    pub x_sweep: Option<Grid>,
    /// Grid k·step for k = 1, 2, … while below 1/c.
    #[arg(long = "x-step", default_value_t = 1e-4)]
    pub x_step: f64,
}

#[derive(Debug, Args)]
pub struct StatdimArgs {
    #[arg(long = "polytope-file", value_name = "PATH", conflicts_with_all = ["set", "generators"])]
    pub polytope_file: Option<PathBuf>,
    /// Built-in set instead of a file.
    #[arg(long = "set", value_enum)]
    pub set: Option<SetKind>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Cone generators, `x1,y1;x2,y2;…`. Always estimated by Monte Carlo.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta")]
    pub generators: Option<String>,
    /// Estimate by Monte Carlo even when the analytic value is available.
    #[arg(long)]
    pub mc: bool,
}

#[derive(Debug, Args)]
pub struct ReversalArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long = "x-small")]
    pub x_small: f64,
    #[arg(long = "x-large")]
    pub x_large: f64,
    #[arg(long = "sigma-sweep", default_value = "1,2,5,10,20,50,100")]
    pub sigma_sweep: Grid,
}

/// Rendered result of one invocation.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub text: String,
    /// Companion plotting script, when requested.
    pub plot_script: Option<String>,
}

/// Runs the parsed command without touching the file system except to
/// read inputs.
pub fn render(cli: &Cli) -> Result<Rendered, CliError> {
    if cli.samples == 0 {
        return Err(CliError::usage("--samples must be >= 1"));
    }
    if cli.n_obs == 0 {
        return Err(CliError::usage("--n-obs must be >= 1"));
    }
    if let Some(path) = &cli.verify {
        if cli.command.is_some() {
            return Err(CliError::usage("--verify takes no subcommand"));
        }
        return Ok(Rendered { text: verify::verify_file(path, cli.seed)?, plot_script: None });
    }
    let command = cli
        .command
        .as_ref()
        .ok_or_else(|| CliError::usage("a subcommand or --verify is required"))?;
    if cli.n_obs != 1 && !matches!(command, Command::Risk(_)) {
        return Err(CliError::usage("--n-obs only applies to `risk`"));
    }
    let table = match command {
        Command::DiffCurve(a) => Some(commands::diff_curve(a, cli)?),
        Command::Heatmap(a) => Some(commands::heatmap(a, cli)?),
        Command::Envelope(a) => Some(commands::envelope(a, cli)?),
        _ => None,
    };
    if let Some((kind, table)) = table {
        let format = cli.format.unwrap_or(Format::Csv);
        let plot_script = if cli.emit_plot_script {
            if format != Format::Csv {
                return Err(CliError::usage("--emit-plot-script needs CSV output"));
            }
            let out = cli.out.as_ref().ok_or_else(|| CliError::usage("--emit-plot-script needs --out"))?;
            Some(plot::script(kind, out))
        } else {
            None
        };
        return Ok(Rendered { text: table.render(format), plot_script });
    }
    if cli.format == Some(Format::Csv) {
        return Err(CliError::usage("this command emits a JSON record; --format csv is not available"));
    }
    if cli.emit_plot_script {
        return Err(CliError::usage("--emit-plot-script only applies to table commands"));
    }
    let record = match command {
        Command::Risk(a) => commands::risk(a, cli)?,
        Command::Statdim(a) => commands::statdim(a, cli)?,
        Command::Reversal(a) => commands::reversal(a, cli)?,
        _ => unreachable!("table commands returned above"),
    };
    Ok(Rendered { text: output::json_line(&record), plot_script: None })
}

/// Renders and writes to `--out` (plus the plot script) or standard output.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let rendered = render(cli)?;
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &rendered.text)?;
            if let Some(script) = &rendered.plot_script {
                std::fs::write(plot::script_path(path), script)?;
            }
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(rendered.text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Reads the worker cap from [`THREADS_ENV`].
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value {
        None => Ok(None),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}
