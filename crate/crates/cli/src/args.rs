use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dgtk::{DiscreteGradientScheme, LTildePolicy, SolverConfig, SolverMethod};

/// Integrate and inspect ODEs in linear-gradient form with
/// discrete-gradient methods.
#[derive(Debug, Parser)]
#[command(name = "dgtk", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the builtin systems and their parameters.
    List,
    /// Integrate with the discrete-gradient map and write the trajectory.
    Integrate(IntegrateArgs),
    /// Report structure class, reconstruction and discrete-gradient residuals.
    Check(CheckArgs),
    /// Compare the drift of V against a baseline integrator.
    Compare(CompareArgs),
    /// Estimate the empirical order of accuracy.
    Order(OrderArgs),
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Builtin system name (see `dgtk list`).
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    pub system: Option<String>,

    /// System definition file.
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,

    /// Parameter override, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,

    /// Potential in x1 for damped-particle.
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub potential: Option<String>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Residual tolerance of the implicit solve.
    #[arg(long, default_value_t = 1e-12, value_parser = parse_positive)]
    pub tol: f64,

    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,

    /// fixed-point or newton.
    #[arg(long, default_value = "fixed-point")]
    pub solver: SolverMethod,

    /// Do not fall back to Newton when fixed-point iteration stalls.
    #[arg(long)]
    pub no_newton_fallback: bool,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            method: self.solver,
            tol: self.tol,
            max_iter: self.max_iter,
            newton_fallback: !self.no_newton_fallback,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct StepArgs {
    /// Initial state, comma separated.
    #[arg(long, value_name = "CSV", allow_hyphen_values = true, value_parser = parse_point)]
    pub x0: Point,

    #[arg(long, default_value_t = 0.1, value_parser = parse_positive)]
    pub tau: f64,

    #[arg(long, default_value_t = 100)]
    pub steps: usize,

    /// midpoint, itoh-abe or avf:<q>.
    #[arg(long, default_value = "midpoint")]
    pub scheme: DiscreteGradientScheme,

    /// How L is evaluated inside a step: frozen or midpoint.
    #[arg(long, default_value = "midpoint")]
    pub policy: LTildePolicy,

    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output if omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub step: StepArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub system: SystemArgs,

    /// Number of sample points.
    #[arg(long, default_value_t = 200)]
    pub points: usize,

    /// Sampling box lo,hi applied to every coordinate.
    #[arg(long = "box", value_name = "LO,HI", allow_hyphen_values = true, value_parser = parse_box)]
    pub sample_box: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    /// Adaptive Dormand–Prince 5(4) sampled at the step times.
    RkReference,
    ExplicitEuler,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub step: StepArgs,

    #[arg(long, value_enum)]
    pub baseline: Baseline,

    /// Relative tolerance of the rk-reference baseline.
    #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
    pub ref_tol: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[command(flatten)]
    pub system: SystemArgs,

    #[arg(long, value_name = "CSV", allow_hyphen_values = true, value_parser = parse_point)]
    pub x0: Point,

    /// Step sizes, comma separated and decreasing (at least 4).
    #[arg(long, value_name = "CSV", value_parser = parse_point)]
    pub tau_list: Point,

    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub t_end: f64,

    /// Scheme to measure, repeatable.
    #[arg(long, default_values_t = [DiscreteGradientScheme::Midpoint])]
    pub scheme: Vec<DiscreteGradientScheme>,

    #[arg(long, default_value = "midpoint")]
    pub policy: LTildePolicy,

    #[command(flatten)]
    pub solver: SolverArgs,
}

/// A comma-separated list of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{}` is not finite", s.trim()))
    }
}

fn parse_point(s: &str) -> Result<Point, String> {
    s.split(',').map(parse_number).collect::<Result<Vec<_>, _>>().map(Point)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("missing parameter name in `{s}`"));
    }
    Ok((k.to_string(), parse_number(v)?))
}

fn parse_box(s: &str) -> Result<(f64, f64), String> {
    let Point(v) = parse_point(s)?;
    match v[..] {
        [lo, hi] if lo < hi => Ok((lo, hi)),
        [_, _] => Err("box needs lo < hi".into()),
        _ => Err(format!("expected LO,HI, got `{s}`")),
    }
}
