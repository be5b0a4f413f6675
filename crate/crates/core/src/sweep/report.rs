use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::{
    BranchJump, ComparisonReport, DispersionCurve, DispersionPoint, PointFlags, Stopband,
    SweepError,
};
use crate::extract::OrientationRule;

pub const CURVE_CSV_HEADER: &str =
    "frequency_hz,beta_rad_per_m,alpha_np_per_m,beta_p_rad,sigma_beta,sigma_alpha,flags";

/// Writes `curve` in the shared dispersion CSV schema.
///
/// `beta` and `beta_p` are written in the curve's current space harmonic.
pub fn write_curve_csv<W: Write>(curve: &DispersionCurve, mut out: W) -> Result<(), SweepError> {
    writeln!(out, "{CURVE_CSV_HEADER}")?;
    for (i, p) in curve.points.iter().enumerate() {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            p.frequency,
            curve.beta(i),
            p.alpha,
            curve.beta_p(i),
            p.sigma_beta,
            p.sigma_alpha,
            p.flags
        )?;
    }
    out.flush()?;
    Ok(())
}

fn parse_field(raw: &str, line: usize, name: &str) -> Result<f64, SweepError> {
    raw.trim().parse().map_err(|_| SweepError::CurveFormat {
        line,
        message: format!("bad {name} value {raw:?}"),
    })
}

/// Reads a dispersion CSV.
///
/// The file does not store the period. When `period` is `None` it is
/// recovered as the median of `beta_p / beta` over points with nonzero
/// `beta`. Sample counts and conditioning are not part of the schema and
/// come back as `1` and NaN.
pub fn read_curve_csv<R: Read>(
    source: R,
    period: Option<f64>,
) -> Result<DispersionCurve, SweepError> {
    let reader = BufReader::new(source);
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => {
            return Err(SweepError::CurveFormat {
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    if header.trim() != CURVE_CSV_HEADER {
        return Err(SweepError::CurveFormat {
            line: 1,
            message: format!("expected header {CURVE_CSV_HEADER:?}"),
        });
    }

    let mut points = Vec::new();
    for (idx, text) in lines {
        let text = text?;
        let line = idx + 1;
        if text.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = text.split(',').collect();
        if cols.len() != 7 {
            return Err(SweepError::CurveFormat {
                line,
                message: format!("expected 7 columns, found {}", cols.len()),
            });
        }
        let flags: PointFlags = cols[6]
            .parse()
            .map_err(|message| SweepError::CurveFormat { line, message })?;
        points.push(DispersionPoint {
            frequency: parse_field(cols[0], line, "frequency")?,
            beta: parse_field(cols[1], line, "beta")?,
            alpha: parse_field(cols[2], line, "alpha")?,
            beta_p: parse_field(cols[3], line, "beta_p")?,
            n_samples: 1,
            sigma_beta: parse_field(cols[4], line, "sigma_beta")?,
            sigma_alpha: parse_field(cols[5], line, "sigma_alpha")?,
            mean_condition: f64::NAN,
            max_residual: None,
            flags,
            orientation: OrientationRule::Magnitude,
        });
    }
    if let Some(i) = points
        .windows(2)
        .position(|w| !(w[1].frequency > w[0].frequency))
    {
        return Err(SweepError::NonMonotonicFrequency(i + 1));
    }

    let period = match period {
        Some(p) => p,
        None => infer_period(&points).ok_or_else(|| SweepError::CurveFormat {
            line: 1,
            message: "cannot infer the period: every beta is zero".into(),
        })?,
    };
    Ok(DispersionCurve {
        points,
        period,
        harmonic: 0,
        branch_anchor: "read from file".into(),
        stopbands: Vec::new(),
        warnings: Vec::new(),
    })
}

fn infer_period(points: &[DispersionPoint]) -> Option<f64> {
    let mut ratios: Vec<f64> = points
        .iter()
        .filter(|p| p.beta != 0.0)
        .map(|p| p.beta_p / p.beta)
        .filter(|r| r.is_finite() && *r > 0.0)
        .collect();
    if ratios.is_empty() {
        return None;
    }
    ratios.sort_by(f64::total_cmp);
    Some(ratios[ratios.len() / 2])
}

/// Machine-readable summary written next to a curve CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub branch_anchor: String,
    pub period_m: f64,
    pub harmonic: i64,
    pub n_points: usize,
    pub flagged_points: usize,
    pub stopbands: Vec<Stopband>,
    pub warnings: Vec<BranchJump>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub comparison: Option<ComparisonReport>,
}

impl CurveReport {
    pub fn from_curve(curve: &DispersionCurve) -> Self {
        Self {
            branch_anchor: curve.branch_anchor.clone(),
            period_m: curve.period,
            harmonic: curve.harmonic,
            n_points: curve.len(),
            flagged_points: curve.points.iter().filter(|p| !p.flags.is_empty()).count(),
            stopbands: curve.stopbands.clone(),
            warnings: curve.warnings.clone(),
            comparison: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
