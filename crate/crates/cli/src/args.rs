use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Flat-plane mechanism toolkit. Angles are in degrees; lengths use the unit
/// declared in the design file.
#[derive(Debug, Parser)]
#[command(name = "fpm", version, propagate_version = true)]
pub struct Cli {
    /// Worker threads for Monte Carlo commands [env: FPM_THREADS]. Results do
    /// not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Endpoint for a control input.
    Fk(FkArgs),
    /// Motor angles for an endpoint.
    Ik(IkArgs),
    /// Check a design against the design-space boundaries.
    Validate(DesignArg),
    /// Convert between bipyramid parameters and link lengths.
    Links(LinksArgs),
    /// Sensitivity landscape over an (H, R) grid.
    Sweep(SweepArgs),
    /// Mean flatness against workspace size.
    Tradeoff(TradeoffArgs),
    /// Kinematic sensitivity of one design.
    Sensitivity(SensitivityArgs),
    /// Flatness of a scan.
    Flatness(ScanArgs),
    /// Build an error field from a reference scan.
    Calibrate(CalibrateArgs),
    /// Subtract an error field from a scan.
    Compensate(CompensateArgs),
    /// Angle between two planes and the runout it causes.
    Tilt(TiltArgs),
    /// Simulate the measurement-free fabrication bootstrap.
    Bootstrap(BootstrapArgs),
    /// Simulate integer-multiple link scaling.
    ScaleLink(ScaleLinkArgs),
    /// Convert G-code into joint angles.
    Plan(PlanArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fk(_) => "fk",
            Command::Ik(_) => "ik",
            Command::Validate(_) => "validate",
            Command::Links(_) => "links",
            Command::Sweep(_) => "sweep",
            Command::Tradeoff(_) => "tradeoff",
            Command::Sensitivity(_) => "sensitivity",
            Command::Flatness(_) => "flatness",
            Command::Calibrate(_) => "calibrate",
            Command::Compensate(_) => "compensate",
            Command::Tilt(_) => "tilt",
            Command::Bootstrap(_) => "bootstrap",
            Command::ScaleLink(_) => "scale-link",
            Command::Plan(_) => "plan",
        }
    }
}

/// Where results and the run manifest go.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Output {
    /// Data file; stdout if absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Manifest file [default: <out>.manifest.json, or stderr without --out].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Overwrite existing files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DesignArg {
    /// Design JSON: {"L_c","R","H","gamma_deg"} or {"links": {"A","B","C","D"}}.
    #[arg(long)]
    pub design: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FkArgs {
    #[arg(long)]
    pub design: PathBuf,
    /// Input tilt θ in degrees, in [0, 180).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Input azimuth φ in degrees.
    #[arg(long, allow_negative_numbers = true)]
    pub phi: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IkArgs {
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub y: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum LinksForm {
    Links,
    Params,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LinksArgs {
    #[arg(long)]
    pub design: PathBuf,
    /// Form to write.
    #[arg(long, value_enum, default_value = "links")]
    pub to: LinksForm,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Pattern {
    Square,
    Sunflower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum AggregateArg {
    MeanOfRatios,
    RatioOfMeans,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MonteCarlo {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Link noise σ as a fraction of L_c.
    #[arg(long, default_value_t = 0.0005)]
    pub sigma: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    /// Workspace size W_d / L_c.
    #[arg(long, default_value_t = 0.4)]
    pub workspace: f64,
    #[arg(long, value_enum, default_value = "square")]
    pub pattern: Pattern,
    #[arg(long, value_enum, default_value = "mean-of-ratios")]
    pub aggregate: AggregateArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Grid size, `N` or `NxM` (H nodes × R nodes).
    #[arg(long, default_value = "20x20")]
    pub grid: String,
    /// Apex angles γ in degrees, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "90")]
    pub gamma: Vec<f64>,
    #[command(flatten)]
    pub mc: MonteCarlo,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TradeoffArgs {
    #[arg(long)]
    pub design: PathBuf,
    /// Workspace sizes W_d / L_c, ascending.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5")]
    pub levels: Vec<f64>,
    #[command(flatten)]
    pub mc: MonteCarlo,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SensitivityArgs {
    #[arg(long)]
    pub design: PathBuf,
    #[command(flatten)]
    pub mc: MonteCarlo,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    /// Scan CSV with header x,y,z and an optional `# unit=` line.
    #[arg(long)]
    pub scan: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub scan: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum BoundaryArg {
    Clip,
    Omit,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompensateArgs {
    #[arg(long)]
    pub scan: PathBuf,
    /// Error field JSON from `calibrate`.
    #[arg(long)]
    pub field: PathBuf,
    /// Points outside the field: clamp to its edge, or reject.
    #[arg(long, value_enum, default_value = "clip")]
    pub boundary: BoundaryArg,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TiltArgs {
    /// First plane as a normal `x,y,z`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "scan_a")]
    pub normal_a: Option<Vec<f64>>,
    /// Second plane as a normal `x,y,z`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "scan_b")]
    pub normal_b: Option<Vec<f64>>,
    /// First plane fitted to a scan.
    #[arg(long)]
    pub scan_a: Option<PathBuf>,
    /// Second plane fitted to a scan.
    #[arg(long)]
    pub scan_b: Option<PathBuf>,
    /// Travel along the tilted axis, for the runout.
    #[arg(long, default_value_t = 50.0)]
    pub travel: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Noise {
    /// Relative σ of copying a link.
    #[arg(long, default_value_t = 0.01)]
    pub copy_noise: f64,
    /// Relative σ of reading a closure gap.
    #[arg(long, default_value_t = 0.005)]
    pub closure_noise: f64,
    /// Relative σ of cutting.
    #[arg(long, default_value_t = 0.005)]
    pub cut_noise: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BootstrapArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub iters: usize,
    /// Fraction of the measured error removed per round.
    #[arg(long, default_value_t = 1.0)]
    pub relaxation: f64,
    /// Starting lengths `A,B,C,K,D`.
    #[arg(long, value_delimiter = ',', num_args = 5, default_value = "1,2,3,2,3")]
    pub init: Vec<f64>,
    #[command(flatten)]
    pub noise: Noise,
    /// Seed of the sensitivity evaluation of each state.
    #[arg(long, default_value_t = 0)]
    pub sk_seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScaleLinkArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiple of the seed link.
    #[arg(long, short)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub seed_length: f64,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long, default_value_t = 5)]
    pub max_iters: usize,
    #[command(flatten)]
    pub noise: Noise,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlanArgs {
    #[arg(long)]
    pub gcode: PathBuf,
    #[arg(long)]
    pub design: PathBuf,
    /// Error field JSON; commanded z is raised by the predicted error.
    #[arg(long)]
    pub field: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub max_segment: f64,
    /// Workspace radius [default: 0.2·L_c].
    #[arg(long)]
    pub radius: Option<f64>,
    /// Also write samples with source lines as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}
