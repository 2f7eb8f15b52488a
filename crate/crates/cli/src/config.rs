//! Command-line grammar and validation.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use waves_core::laminar::FlowParams;
use waves_core::regions::CurveId;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "waves", version, about = "Stokes waves on constant-vorticity flows: stability coefficients, region curves and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Write here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// `n_modes x n_y` of the spectral oracle, written `8x200`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub n_modes: usize,
    pub n_y: usize,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let (m, y) = s.split_once('x').ok_or_else(|| format!("expected MODESxPOINTS, got {s:?}"))?;
    let n_modes = m.trim().parse().map_err(|_| format!("bad mode count {m:?}"))?;
    let n_y = y.trim().parse().map_err(|_| format!("bad point count {y:?}"))?;
    Ok(Grid { n_modes, n_y })
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Full stability report at one (a, d).
    Compute(ComputeArgs),
    /// One region curve as a table.
    Curve(CurveArgs),
    /// Tables (and optionally a plot) for figure 1..6.
    Figure(FigureArgs),
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ComputeArgs {
    /// Vorticity.
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Laminar depth.
    #[arg(long, allow_negative_numbers = true)]
    pub d: f64,
    /// Branch amplitude; adds the truncated branch and its oracle eigenvalues.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Tolerance of the dispersion solve.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Oracle resolution as MODESxPOINTS.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<Grid>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    /// critical_depth, stagnation_depth, d0, b_plus_lower, b_plus_upper, ystar_on_d0 or signed_log_mu2.
    pub id: String,
    /// Fixed vorticity for signed_log_mu2.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = -4.0)]
    pub a_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 4.0)]
    pub a_max: f64,
    /// Top of the depth axis for signed_log_mu2.
    #[arg(long)]
    pub d_max: Option<f64>,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FigureArgs {
    pub number: u8,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Smaller samples and grids.
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run a single criterion.
    #[arg(long)]
    pub criterion: Option<u8>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

/// A validated invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Rewrites bare `key=value` arguments as `--key=value`.
pub fn normalize_args<I, S>(args: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    args.into_iter()
        .map(Into::into)
        .enumerate()
        .map(|(i, arg)| match arg.split_once('=') {
            Some((key, value))
                if i > 0
                    && !key.is_empty()
                    && !key.starts_with('-')
                    && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') =>
            {
                format!("--{}={value}", key.replace('_', "-"))
            }
            _ => arg,
        })
        .collect()
}

impl RunConfig {
    pub fn parse_from<I, S>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let cli = Cli::try_parse_from(normalize_args(args))?;
        Ok(Self::from_cli(cli))
    }

    pub fn from_cli(cli: Cli) -> Self {
        let output = match &cli.command {
            Command::Compute(c) => c.output.clone(),
            Command::Curve(c) => c.output.clone(),
            Command::Figure(c) => c.output.clone(),
            Command::Verify(c) => c.output.clone(),
        };
        let default = match cli.command {
            Command::Compute(_) => Format::Json,
            _ => Format::Csv,
        };
        Self { format: output.format.unwrap_or(default), out: output.out, command: cli.command }
    }

    /// Checks every numeric parameter against the preconditions of the
    /// operation it feeds.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        let finite = |name: &str, v: f64| if v.is_finite() { Ok(()) } else { usage(format!("{name} must be finite, got {v}")) };
        match &self.command {
            Command::Compute(c) => {
                finite("a", c.a)?;
                finite("d", c.d)?;
                let p = FlowParams::new(c.a, c.d).map_err(|e| CliError::Usage(format!("d: {e}")))?;
                p.require_subcritical().map_err(|e| CliError::Usage(format!("d must exceed the critical depth: {e}")))?;
                if let Some(t) = c.t {
                    if !(t.is_finite() && t >= 0.0) {
                        return usage(format!("t must be a finite amplitude >= 0, got {t}"));
                    }
                }
                if let Some(tol) = c.tol {
                    if !(tol > 0.0 && tol < 1.0) {
                        return usage(format!("tol must lie in (0, 1), got {tol}"));
                    }
                }
                if let Some(g) = c.grid {
                    if g.n_modes < 2 || g.n_y < 8 {
                        return usage(format!("grid needs at least 2 modes and 8 points, got {}x{}", g.n_modes, g.n_y));
                    }
                    if c.t.is_none() {
                        return usage("grid only applies together with t".into());
                    }
                }
                if self.format == Format::Svg {
                    return usage("compute emits csv or json".into());
                }
            }
            Command::Curve(c) => {
                let id = CurveId::parse(&c.id).ok_or_else(|| CliError::Usage(format!("unknown curve {:?}", c.id)))?;
                if c.points < 2 {
                    return usage(format!("points must be at least 2, got {}", c.points));
                }
                finite("a-min", c.a_min)?;
                finite("a-max", c.a_max)?;
                if id == CurveId::SignedLogMu2 {
                    let Some(a) = c.a else {
                        return usage("signed_log_mu2 needs a fixed a".into());
                    };
                    finite("a", a)?;
                    if let Some(top) = c.d_max {
                        if !(top > waves_core::laminar::critical_depth(a)) {
                            return usage(format!("d-max must exceed the critical depth at a = {a}"));
                        }
                    }
                } else if !(c.a_min < c.a_max) {
                    return usage(format!("need a-min < a-max, got {} and {}", c.a_min, c.a_max));
                }
            }
            Command::Figure(f) => {
                if !(1..=6).contains(&f.number) {
                    return usage(format!("figure must be 1..6, got {}", f.number));
                }
                if f.points < 2 {
                    return usage(format!("points must be at least 2, got {}", f.points));
                }
            }
            Command::Verify(v) => {
                if let Some(id) = v.criterion {
                    if !(1..=waves_core::verify::CRITERIA).contains(&id) {
                        return usage(format!("criterion must be 1..9, got {id}"));
                    }
                }
                if self.format == Format::Svg {
                    return usage("verify emits csv or json".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_become_flags() {
        let args = normalize_args(["waves", "compute", "a=-3", "d=1.2", "--t", "0.1", "x"]);
        assert_eq!(args, ["waves", "compute", "--a=-3", "--d=1.2", "--t", "0.1", "x"]);
        assert_eq!(normalize_args(["waves", "curve", "d0", "a_min=-2"])[3], "--a-min=-2");
    }

    #[test]
    fn parses_and_validates() {
        let c = RunConfig::parse_from(["waves", "compute", "a=0", "d=2"]).unwrap();
        assert_eq!(c.format, Format::Json);
        c.validate().unwrap();
        let c = RunConfig::parse_from(["waves", "compute", "--a", "-3", "--d", "0.5"]).unwrap();
        assert!(matches!(c.validate(), Err(CliError::Usage(m)) if m.contains("critical")));
        let c = RunConfig::parse_from(["waves", "figure", "7"]).unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::parse_from(["waves", "curve", "d0", "--format", "svg"]).unwrap();
        assert_eq!(c.format, Format::Svg);
        c.validate().unwrap();
        assert!(RunConfig::parse_from(["waves", "compute", "a=0"]).is_err());
    }

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("8x200").unwrap(), Grid { n_modes: 8, n_y: 200 });
        assert!(parse_grid("8,200").is_err());
    }
}
