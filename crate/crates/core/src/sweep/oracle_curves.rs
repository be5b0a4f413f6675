use std::f64::consts::PI;

use num_complex::Complex64;

use super::{unwrap_curve, AnchorPolicy, DispersionCurve, DispersionPoint, PointFlags, SweepError};
use crate::extract::OrientationRule;
use crate::oracles::{
    bloch_solution, cell_abcd, te10_kz, OracleError, UnitCellSpec, WaveguideSpec,
};

fn oracle_point(
    frequency: f64,
    kz: Complex64,
    period: f64,
    orientation: OrientationRule,
    band_edge_separation: f64,
) -> DispersionPoint {
    let u = (Complex64::i() * kz * period).exp();
    DispersionPoint {
        frequency,
        beta: kz.re,
        alpha: -kz.im,
        beta_p: kz.re * period,
        n_samples: 1,
        sigma_beta: 0.0,
        sigma_alpha: 0.0,
        mean_condition: 1.0,
        max_residual: None,
        flags: PointFlags {
            band_edge: (u - u.inv()).norm() < band_edge_separation,
            ..Default::default()
        },
        orientation,
    }
}

/// Closed-form TE10 curve on `freqs`.
///
/// The closed form is already continuous, so no unwrapping is applied;
/// `period` only sets `beta_p` and the band-edge flags.
pub fn te10_curve(
    spec: &WaveguideSpec,
    freqs: &[f64],
    period: f64,
    band_edge_separation: f64,
) -> Result<DispersionCurve, SweepError> {
    if freqs.len() < 2 {
        return Err(SweepError::TooFewPoints {
            needed: 2,
            got: freqs.len(),
        });
    }
    if let Some(i) = freqs.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(SweepError::NonMonotonicFrequency(i + 1));
    }
    let points = freqs
        .iter()
        .map(|&f| {
            te10_kz(f, spec).map(|kz| {
                oracle_point(
                    f,
                    kz,
                    period,
                    OrientationRule::Magnitude,
                    band_edge_separation,
                )
            })
        })
        .collect::<Result<Vec<_>, OracleError>>()?;
    Ok(DispersionCurve {
        points,
        period,
        harmonic: 0,
        branch_anchor: "closed form".into(),
        stopbands: Vec::new(),
        warnings: Vec::new(),
    })
}

/// Transfer-matrix Bloch curve of `cell` on `freqs`, unwrapped with
/// `anchor` exactly as extracted curves are.
///
/// Frequencies where the cell sits exactly on `A + D = ±2` get `beta p` of
/// 0 or pi and both `band_edge` and `orientation_ambiguous` flags.
pub fn bloch_curve(
    cell: &UnitCellSpec,
    freqs: &[f64],
    anchor: AnchorPolicy,
    band_edge_separation: f64,
) -> Result<DispersionCurve, SweepError> {
    let period = cell.period();
    let mut points = Vec::with_capacity(freqs.len());
    for &f in freqs {
        let m = cell_abcd(cell, f)?;
        let point = match bloch_solution(&m, period, 1e-9) {
            Ok(sol) => oracle_point(f, sol.kz, period, sol.rule, band_edge_separation),
            Err(OracleError::DegenerateCell) => {
                let phase = if m.half_trace().re < 0.0 { PI } else { 0.0 };
                let mut p = oracle_point(
                    f,
                    Complex64::new(phase / period, 0.0),
                    period,
                    OrientationRule::PhaseSign,
                    band_edge_separation,
                );
                p.flags.band_edge = true;
                p.flags.orientation_ambiguous = true;
                p
            }
            Err(e) => return Err(e.into()),
        };
        points.push(point);
    }
    let mut curve = unwrap_curve(points, period, anchor)?;
    curve.branch_anchor = format!("transfer matrix; {}", curve.branch_anchor);
    Ok(curve)
}
