use serde::{Deserialize, Serialize};

use super::{DispersionCurve, SweepError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompareOptions {
    /// Skip points flagged `band_edge` in either curve.
    pub exclude_band_edge: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            exclude_band_edge: true,
        }
    }
}

/// Discrepancy of curve `a` against reference curve `b`.
///
/// Relative errors are normalised by the reference `|k_z| = |beta - j alpha|`,
/// which stays meaningful where either constant alone passes through zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n_compared: usize,
    pub n_excluded: usize,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub max_rel_beta: f64,
    pub rms_rel_beta: f64,
    pub max_rel_alpha: f64,
    pub max_abs_alpha: f64,
    pub rms_abs_alpha: f64,
    /// Frequency of the largest relative `beta` error.
    pub worst_beta_hz: f64,
}

impl ComparisonReport {
    /// True when both relative errors are within `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.max_rel_beta <= tol && self.max_rel_alpha <= tol
    }
}

struct Sample {
    beta: f64,
    alpha: f64,
    band_edge: bool,
}

/// Linear interpolation of `curve` at `f`, or `None` outside its range.
fn interpolate(curve: &DispersionCurve, f: f64) -> Option<Sample> {
    let pts = &curve.points;
    let (first, last) = (pts.first()?, pts.last()?);
    if f < first.frequency || f > last.frequency {
        return None;
    }
    let hi = pts.partition_point(|p| p.frequency < f);
    if pts[hi].frequency == f {
        return Some(Sample {
            beta: curve.beta(hi),
            alpha: pts[hi].alpha,
            band_edge: pts[hi].flags.band_edge,
        });
    }
    let lo = hi - 1;
    let t = (f - pts[lo].frequency) / (pts[hi].frequency - pts[lo].frequency);
    let lerp = |x: f64, y: f64| x + t * (y - x);
    Some(Sample {
        beta: lerp(curve.beta(lo), curve.beta(hi)),
        alpha: lerp(pts[lo].alpha, pts[hi].alpha),
        band_edge: pts[lo].flags.band_edge || pts[hi].flags.band_edge,
    })
}

/// Compares `a` with reference `b` at the frequencies of `a` that fall
/// inside the range of `b`, interpolating `b` linearly in frequency.
pub fn compare_curves(
    a: &DispersionCurve,
    b: &DispersionCurve,
    options: &CompareOptions,
) -> Result<ComparisonReport, SweepError> {
    let mut report = ComparisonReport {
        n_compared: 0,
        n_excluded: 0,
        f_min_hz: f64::INFINITY,
        f_max_hz: f64::NEG_INFINITY,
        max_rel_beta: 0.0,
        rms_rel_beta: 0.0,
        max_rel_alpha: 0.0,
        max_abs_alpha: 0.0,
        rms_abs_alpha: 0.0,
        worst_beta_hz: f64::NAN,
    };
    let mut sum_beta = 0.0;
    let mut sum_alpha = 0.0;

    for (i, p) in a.points.iter().enumerate() {
        let Some(reference) = interpolate(b, p.frequency) else {
            continue;
        };
        if options.exclude_band_edge && (p.flags.band_edge || reference.band_edge) {
            report.n_excluded += 1;
            continue;
        }
        let scale = reference.beta.hypot(reference.alpha);
        let d_beta = (a.beta(i) - reference.beta).abs();
        let d_alpha = (p.alpha - reference.alpha).abs();
        let (rel_beta, rel_alpha) = if scale > 0.0 {
            (d_beta / scale, d_alpha / scale)
        } else if d_beta == 0.0 && d_alpha == 0.0 {
            (0.0, 0.0)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };

        report.n_compared += 1;
        report.f_min_hz = report.f_min_hz.min(p.frequency);
        report.f_max_hz = report.f_max_hz.max(p.frequency);
        if rel_beta > report.max_rel_beta || report.worst_beta_hz.is_nan() {
            report.max_rel_beta = report.max_rel_beta.max(rel_beta);
            report.worst_beta_hz = p.frequency;
        }
        report.max_rel_alpha = report.max_rel_alpha.max(rel_alpha);
        report.max_abs_alpha = report.max_abs_alpha.max(d_alpha);
        sum_beta += rel_beta * rel_beta;
        sum_alpha += d_alpha * d_alpha;
    }

    if report.n_compared == 0 {
        return Err(SweepError::NoOverlap);
    }
    let n = report.n_compared as f64;
    report.rms_rel_beta = (sum_beta / n).sqrt();
    report.rms_abs_alpha = (sum_alpha / n).sqrt();
    Ok(report)
}
