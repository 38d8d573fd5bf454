use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lits::frames::NormalMode;
use lits::pcio::Colormap;

/// Parses an angle given in radians (`1.25`) or as a multiple of π
/// (`pi`, `2pi/3`, `-pi/4`, `0.5pi`).
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().replace('π', "pi").replace('*', "");
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| format!("not an angle: {s:?}"));
    };
    let coef = match &t[..at] {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| format!("bad coefficient in {s:?}"))?,
    };
    let rest = &t[at + 2..];
    let denom = match rest {
        "" => 1.0,
        r => r
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(|| format!("bad divisor in {s:?}"))?,
    };
    Ok(coef * PI / denom)
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_pct(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if (0.0..=100.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 100]"))
    }
}

fn parse_colormap(s: &str) -> Result<Colormap, String> {
    s.parse().map_err(|e: lits::LitsError| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "lits", version, about = "Lit-up segment descriptors for point clouds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-point descriptor records (JSON lines, or CSV for a .csv output).
    Compute(ComputeArgs),
    /// Boundary labels and outside directions.
    Boundary(BoundaryArgs),
    /// Synthetic corner and line experiments.
    Synth(SynthArgs),
    /// Recovers neighbor offsets from a list of spherical caps.
    Invert(InvertArgs),
    /// Surroundedness angle of a planar neighborhood centered at the origin.
    PhiStar(PhiStarArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalModeArg {
    Tangent,
    FixedZ,
    MaxZOrthocomplement,
}

impl From<NormalModeArg> for NormalMode {
    fn from(m: NormalModeArg) -> Self {
        match m {
            NormalModeArg::Tangent => NormalMode::Tangent,
            NormalModeArg::FixedZ => NormalMode::FixedZ,
            NormalModeArg::MaxZOrthocomplement => NormalMode::MaxZOrthocomplement,
        }
    }
}

/// Exactly one neighborhood mode.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct NeighborhoodArg {
    /// Fixed-radius neighborhoods.
    #[arg(long)]
    pub radius: Option<f64>,
    /// k-nearest-neighbor neighborhoods.
    #[arg(long)]
    pub knn: Option<usize>,
}

/// Fields shared by `compute` and `boundary`.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Point cloud (.ply, otherwise XYZ text).
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Ball ratio `r_p / r_Q`.
    #[arg(long, value_parser = parse_unit, default_value = "0.5")]
    pub lambda: f64,
    /// Limiting angle of incidence.
    #[arg(long, value_parser = parse_angle, default_value = "pi/2")]
    pub phi: f64,
    /// Absolute ball radius, overriding `lambda`.
    #[arg(long)]
    pub r_p_abs: Option<f64>,
    #[command(flatten)]
    pub neighborhood: NeighborhoodArg,
    /// Plane of the LitS for 3D clouds.
    #[arg(long, value_enum, default_value = "tangent")]
    pub normal_mode: NormalModeArg,
    /// Count threshold, in percent.
    #[arg(long, value_parser = parse_pct, default_value = "15")]
    pub threshold_pct: f64,
    /// Use the cumulative LitS instead of the regular one.
    #[arg(long)]
    pub cumulative: bool,
    /// Circular moving-average window for smoothed total variation (0 = off).
    #[arg(long, default_value = "0")]
    pub smooth_window: usize,
    /// Recorded for reproducibility; the per-point pipeline is deterministic.
    #[arg(long, default_value = "0")]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct PlyOut {
    /// Also write a colored PLY.
    #[arg(long)]
    pub ply_out: Option<PathBuf>,
    /// Record field that drives the colors.
    #[arg(long, default_value = "unlit_proportion")]
    pub color_by: String,
    /// coolwarm, jet or green_red.
    #[arg(long, value_parser = parse_colormap, default_value = "coolwarm")]
    pub colormap: Colormap,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(flatten)]
    pub ply: PlyOut,
    /// Step of the surroundedness class (planar clouds only).
    #[arg(long, value_parser = parse_angle)]
    pub class_step: Option<f64>,
    /// Samples per turn for smoothing and slopes.
    #[arg(long, default_value = "720")]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub config: RunConfig,
    /// Also write the cloud with a 0/1 boundary attribute, interior green and
    /// boundary red.
    #[arg(long)]
    pub ply_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Corner,
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CrossLawArg {
    Uniform,
    Triangular,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Corner apertures.
    #[arg(long, value_parser = parse_angle, value_delimiter = ',', default_value = "pi/4,pi/2,3pi/4,pi")]
    pub alphas: Vec<f64>,
    /// Von Mises concentrations; switches corners to a concentration sweep.
    #[arg(long, value_delimiter = ',')]
    pub kappas: Vec<f64>,
    /// Ball ratios.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8")]
    pub lambdas: Vec<f64>,
    /// Line widths, in units of the neighborhood radius.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.4,0.6")]
    pub widths: Vec<f64>,
    /// Line directions.
    #[arg(long, value_parser = parse_angle, value_delimiter = ',', default_value = "0,pi/6,pi/3,pi/2,2pi/3,5pi/6")]
    pub directions: Vec<f64>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub cross_law: CrossLawArg,
    #[arg(long, value_parser = parse_angle, default_value = "pi/2")]
    pub phi: f64,
    /// Points per synthetic neighborhood.
    #[arg(long, default_value = "2000")]
    pub n: usize,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    /// CSV output; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// JSON list of caps `{"center": [x, y, z], "half_angle": a, "multiplicity": m}`.
    #[arg(long)]
    pub caps: PathBuf,
    #[arg(long)]
    pub r_p: f64,
    #[arg(long, value_parser = parse_angle)]
    pub phi: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhiStarArgs {
    /// Planar neighbor coordinates about the origin.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_unit, default_value = "0.5")]
    pub lambda: f64,
    /// Absolute ball radius, overriding `lambda`.
    #[arg(long)]
    pub r_p_abs: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_literals() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("0.5pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert_eq!(parse_angle("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("xpi").is_err());
        assert!(parse_angle("abc").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
