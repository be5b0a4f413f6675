//! Frequency sweeps: per-frequency aggregation, cross-frequency branch
//! tracking, stopband annotation, space-harmonic shifts and curve
//! comparison.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::{ExtractError, OrientationRule};
use crate::oracles::OracleError;
use crate::trace::TraceError;
use crate::trace_io::TraceIoError;

mod aggregate;
mod bands;
mod compare;
mod oracle_curves;
mod report;
mod run;
mod unwrap;

pub use aggregate::{aggregate_frequency, AggregateConfig};
pub use bands::{detect_stopbands, StopbandConfig, StopbandMode};
pub use compare::{compare_curves, CompareOptions, ComparisonReport};
pub use oracle_curves::{bloch_curve, te10_curve};
pub use report::{read_curve_csv, write_curve_csv, CurveReport, CURVE_CSV_HEADER};
pub use run::{extract_curve, SweepConfig};
pub use unwrap::{unwrap_curve, AnchorPolicy};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("no valid triplets at {frequency} Hz ({rejected} rejected)")]
    NoValidTriplets { frequency: f64, rejected: usize },
    #[error("a sweep needs at least {needed} frequency points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("frequencies must be strictly increasing (at index {0})")]
    NonMonotonicFrequency(usize),
    #[error("traces disagree on the structure period: {0:e} m vs {1:e} m")]
    InconsistentPeriod(f64, f64),
    #[error("curves do not overlap in frequency")]
    NoOverlap,
    #[error("curve file line {line}: {message}")]
    CurveFormat { line: usize, message: String },
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    TraceIo(#[from] TraceIoError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Diagnostic flags on one dispersion point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointFlags {
    pub band_edge: bool,
    pub low_condition: bool,
    pub high_residual: bool,
    pub orientation_ambiguous: bool,
}

impl PointFlags {
    const NAMES: [&'static str; 4] = [
        "band_edge",
        "low_condition",
        "high_residual",
        "orientation_ambiguous",
    ];

    fn bits(&self) -> [bool; 4] {
        [
            self.band_edge,
            self.low_condition,
            self.high_residual,
            self.orientation_ambiguous,
        ]
    }

    pub fn is_empty(&self) -> bool {
        !self.bits().iter().any(|b| *b)
    }
}

impl fmt::Display for PointFlags {
    /// `|`-separated names, empty when no flag is set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = Self::NAMES
            .iter()
            .zip(self.bits())
            .filter(|(_, on)| *on)
            .map(|(n, _)| *n)
            .collect();
        f.write_str(&names.join("|"))
    }
}

impl FromStr for PointFlags {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut flags = PointFlags::default();
        for name in s.split('|').map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "band_edge" => flags.band_edge = true,
                "low_condition" => flags.low_condition = true,
                "high_residual" => flags.high_residual = true,
                "orientation_ambiguous" => flags.orientation_ambiguous = true,
                other => return Err(format!("unknown flag {other:?}")),
            }
        }
        Ok(flags)
    }
}

/// Aggregated estimate at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    /// Hz.
    pub frequency: f64,
    /// rad/m. Principal after aggregation, unwrapped after [`unwrap_curve`].
    pub beta: f64,
    /// Np/m.
    pub alpha: f64,
    /// `beta * p`, rad.
    pub beta_p: f64,
    pub n_samples: usize,
    pub sigma_beta: f64,
    pub sigma_alpha: f64,
    pub mean_condition: f64,
    pub max_residual: Option<f64>,
    pub flags: PointFlags,
    /// How the forward root was chosen; tie-based choices let the unwrapper
    /// consider the mirrored root.
    pub orientation: OrientationRule,
}

/// Annotation style of a stopband.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopbandKind {
    /// Lossless: `beta p` pinned to a multiple of pi with `alpha > 0`.
    Strict,
    /// Lossy: attenuation peak with `beta p` passing near a multiple of pi.
    Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stopband {
    pub f_low: f64,
    pub f_high: f64,
    pub multiple_of_pi: i64,
    pub kind: StopbandKind,
}

/// Adjacent unwrapped points that still differ by more than pi/2 per cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchJump {
    pub frequency: f64,
    pub jump_rad: f64,
}

/// Frequency-ordered, branch-tracked dispersion data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    /// Fundamental space harmonic; see [`DispersionCurve::beta`].
    pub points: Vec<DispersionPoint>,
    /// Structure period, metres.
    pub period: f64,
    /// Space-harmonic index applied on output.
    pub harmonic: i64,
    pub branch_anchor: String,
    pub stopbands: Vec<Stopband>,
    pub warnings: Vec<BranchJump>,
}

impl DispersionCurve {
    /// `2 pi n / p` for the current harmonic.
    pub fn harmonic_offset(&self) -> f64 {
        2.0 * PI * self.harmonic as f64 / self.period
    }

    /// Phase constant of point `i` in the current space harmonic.
    pub fn beta(&self, i: usize) -> f64 {
        let beta = self.points[i].beta;
        if self.harmonic == 0 {
            beta
        } else {
            beta + self.harmonic_offset()
        }
    }

    pub fn beta_p(&self, i: usize) -> f64 {
        if self.harmonic == 0 {
            self.points[i].beta_p
        } else {
            self.beta(i) * self.period
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.frequency).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.beta(i)).collect()
    }
}

/// Moves the curve to space harmonic `harmonic + n`; `alpha` is untouched.
///
/// The shift is kept as an index and applied on read, so shifting by `n`
/// and then `-n` restores every value bit for bit.
pub fn shift_space_harmonic(curve: &DispersionCurve, n: i64) -> DispersionCurve {
    let mut shifted = curve.clone();
    shifted.harmonic += n;
    shifted
}

/// `|x - k pi|` for the nearest integer `k`, and `k`.
pub(crate) fn distance_to_pi_multiple(x: f64) -> (f64, i64) {
    let k = (x / PI).round();
    ((x - k * PI).abs(), k as i64)
}
