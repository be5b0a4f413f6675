use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::units::{positive_frequency, positive_length};

#[derive(Debug, Parser)]
#[command(
    name = "fpps",
    version,
    about = "Propagation constants of uniform and periodic guides from three-point field samples"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic field traces with known propagation constants.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Convert a delimited simulator export into a canonical trace file.
    Import(ImportArgs),
    /// Extract a dispersion curve from trace files.
    Extract(ExtractArgs),
    /// Evaluate a reference dispersion curve.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Compare two dispersion curves; exits with 1 when `--tol` is exceeded.
    Compare(CompareArgs),
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Forward plus optional backward wave in a uniform guide.
    Uniform(UniformArgs),
    /// Interior field of a finite, terminated cascade of unit cells.
    Periodic(PeriodicArgs),
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Closed-form TE10 (or TEM) propagation constant.
    Te10(Te10Args),
    /// Transfer-matrix Bloch wavenumber of a unit cell.
    Bloch(BlochArgs),
}

/// Single frequency or a linear sweep.
#[derive(Debug, Clone, Args)]
pub struct FrequencyArgs {
    /// Single frequency, e.g. `25GHz`.
    #[arg(long = "f", value_parser = positive_frequency, conflicts_with_all = ["f_start", "f_stop", "f_count"])]
    pub f: Option<f64>,
    /// First frequency of a sweep.
    #[arg(long, value_parser = positive_frequency, requires_all = ["f_stop", "f_count"])]
    pub f_start: Option<f64>,
    /// Last frequency of a sweep.
    #[arg(long, value_parser = positive_frequency)]
    pub f_stop: Option<f64>,
    /// Number of sweep points, at least 2.
    #[arg(long)]
    pub f_count: Option<usize>,
}

/// Guide cross-section shared by every layer.
#[derive(Debug, Clone, Args)]
pub struct GuideArgs {
    /// Broad-wall width of the guide (TE10 cutoff wavenumber pi/a).
    #[arg(long = "a", value_parser = positive_length, required_unless_present = "tem")]
    pub width: Option<f64>,
    /// Plane wave instead of TE10 (zero cutoff wavenumber).
    #[arg(long, conflicts_with = "width")]
    pub tem: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MediumArgs {
    /// Relative permittivity of the filling.
    #[arg(long, default_value_t = 1.0)]
    pub er: f64,
    /// Loss tangent of the filling.
    #[arg(long, default_value_t = 0.0)]
    pub tand: f64,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// Relative complex Gaussian noise (fraction of the trace maximum).
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Seed of the noise generator; frequency `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct UniformArgs {
    #[command(flatten)]
    pub guide: GuideArgs,
    #[command(flatten)]
    pub medium: MediumArgs,
    #[command(flatten)]
    pub freq: FrequencyArgs,
    /// Period written into the trace (any length for a uniform guide).
    #[arg(long, value_parser = positive_length)]
    pub period: f64,
    /// Sample spacing; must divide the period.
    #[arg(long, value_parser = positive_length)]
    pub dz: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Position of the first sample.
    #[arg(long, value_parser = crate::units::parse_length, default_value = "0", allow_hyphen_values = true)]
    pub z_start: f64,
    /// Backward-to-forward amplitude ratio.
    #[arg(long, default_value_t = 0.0)]
    pub reflection: f64,
    /// Phase of the backward wave relative to the forward wave, degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub reflection_phase: f64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Voltage,
    Current,
}

#[derive(Debug, Args)]
pub struct PeriodicArgs {
    #[command(flatten)]
    pub guide: GuideArgs,
    /// Unit cell, e.g. `vacuum:3mm,eps2.2:3mm` or `eps2.2@0.005:3mm,shunt:-2j`.
    #[arg(long)]
    pub cell: String,
    /// Number of cells in the structure.
    #[arg(long)]
    pub cells: usize,
    /// `matched`, `short`, `open` or `gamma:<magnitude>@<degrees>`.
    #[arg(long, default_value = "matched")]
    pub termination: String,
    #[command(flatten)]
    pub freq: FrequencyArgs,
    /// Sample spacing; must divide every layer.
    #[arg(long, value_parser = positive_length)]
    pub dz: f64,
    /// Line quantity to sample.
    #[arg(long, value_enum, default_value_t = Quantity::Voltage)]
    pub quantity: Quantity,
    /// Cells trimmed from each end before sampling.
    #[arg(long, default_value_t = 0.5)]
    pub margin: f64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    /// Delimited export to read.
    pub input: PathBuf,
    /// Column mapping as a `key=value` file; defaults to `z,re,im` columns.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Frequency of the export.
    #[arg(long = "f", value_parser = positive_frequency)]
    pub frequency: f64,
    /// Structure period.
    #[arg(long, value_parser = positive_length)]
    pub period: f64,
    /// Field component label.
    #[arg(long, default_value = "Ey")]
    pub component: String,
    /// Transverse x of the sampling line.
    #[arg(long, value_parser = crate::units::parse_length, default_value = "0", allow_hyphen_values = true)]
    pub x: f64,
    /// Transverse y of the sampling line.
    #[arg(long, value_parser = crate::units::parse_length, default_value = "0", allow_hyphen_values = true)]
    pub y: f64,
    /// Canonical trace file to write.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Smallest |E(z)| / max(|E(z-p)|, |E(z+p)|) accepted as a triplet centre.
    #[arg(long, env = "FPPS_NODE_THRESHOLD", default_value_t = 1e-6)]
    pub node_threshold: f64,
    /// Mean condition below which a point is flagged `low_condition`.
    #[arg(long, env = "FPPS_LOW_CONDITION", default_value_t = 0.05)]
    pub low_condition: f64,
    /// Multimode residual above which a point is flagged `high_residual`.
    #[arg(long, env = "FPPS_HIGH_RESIDUAL", default_value_t = 1e-3)]
    pub high_residual: f64,
    /// Largest |beta p - n pi| inside a lossless stopband, rad.
    #[arg(long, env = "FPPS_EDGE_TOL", default_value_t = 1e-3)]
    pub edge_tol: f64,
    /// Smallest attenuation counted inside a stopband, Np/m.
    #[arg(long, env = "FPPS_ALPHA_FLOOR", default_value_t = 1e-6)]
    pub alpha_floor: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CurveOutputArgs {
    /// Curve CSV destination; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// JSON report destination.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Annotate lossy transitions instead of strict stopbands.
    #[arg(long)]
    pub lossy: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Trace files, or directories whose `*.trace` files are all read.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Space harmonic of the output curve.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub harmonic: i64,
    /// Anchor the lowest frequency at the branch nearest this beta, rad/m.
    #[arg(long, allow_negative_numbers = true)]
    pub anchor_beta: Option<f64>,
    /// Samples per period, overriding period/dz (uniform guides only).
    #[arg(long)]
    pub stride: Option<usize>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    pub output: CurveOutputArgs,
}

#[derive(Debug, Args)]
pub struct Te10Args {
    #[command(flatten)]
    pub guide: GuideArgs,
    #[command(flatten)]
    pub medium: MediumArgs,
    #[command(flatten)]
    pub freq: FrequencyArgs,
    /// Period used for `beta p`.
    #[arg(long, value_parser = positive_length)]
    pub period: f64,
    #[command(flatten)]
    pub output: CurveOutputArgs,
}

#[derive(Debug, Args)]
pub struct BlochArgs {
    #[command(flatten)]
    pub guide: GuideArgs,
    /// Unit cell, same syntax as `synth periodic`.
    #[arg(long)]
    pub cell: String,
    #[command(flatten)]
    pub freq: FrequencyArgs,
    /// Anchor the lowest frequency at the branch nearest this beta, rad/m.
    #[arg(long, allow_negative_numbers = true)]
    pub anchor_beta: Option<f64>,
    #[command(flatten)]
    pub output: CurveOutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Curve under test.
    pub curve: PathBuf,
    /// Reference curve.
    pub reference: PathBuf,
    /// Largest accepted relative beta and alpha error.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Keep points flagged `band_edge`.
    #[arg(long)]
    pub include_band_edge: bool,
    /// Also write the metrics JSON here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

