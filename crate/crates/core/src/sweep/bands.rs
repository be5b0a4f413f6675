use super::{distance_to_pi_multiple, DispersionCurve, Stopband, StopbandKind};

/// Which stopband criterion to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopbandMode {
    /// `beta p` pinned to a multiple of pi while `alpha > 0`.
    #[default]
    Lossless,
    /// Attenuation peaks where `beta p` passes near a multiple of pi.
    Lossy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopbandConfig {
    /// Largest `|beta p - n pi|` inside a lossless stopband, rad.
    pub edge_tol: f64,
    /// Smallest `alpha` that counts as attenuating, Np/m.
    pub alpha_floor: f64,
    /// Largest `|beta p - n pi|` at a lossy attenuation peak, rad.
    pub transition_tol: f64,
    /// Peaks whose prominence is below this fraction of their height are
    /// ignored in lossy mode.
    pub min_prominence: f64,
}

impl Default for StopbandConfig {
    fn default() -> Self {
        Self {
            edge_tol: 1e-3,
            alpha_floor: 1e-6,
            transition_tol: 0.25,
            min_prominence: 0.05,
        }
    }
}

/// Returns a copy of `curve` with its stopbands re-annotated.
///
/// Phases are read in the curve's current space harmonic. Shifting by whole
/// harmonics moves `beta p` by multiples of 2 pi, so the detected intervals
/// do not depend on the harmonic, only their `multiple_of_pi` does.
pub fn detect_stopbands(
    curve: &DispersionCurve,
    mode: StopbandMode,
    config: &StopbandConfig,
) -> DispersionCurve {
    let mut out = curve.clone();
    out.stopbands = match mode {
        StopbandMode::Lossless => strict_bands(curve, config),
        StopbandMode::Lossy => transition_bands(curve, config),
    };
    out
}

fn strict_bands(curve: &DispersionCurve, config: &StopbandConfig) -> Vec<Stopband> {
    let mut bands = Vec::new();
    let mut open: Option<Stopband> = None;
    for (i, p) in curve.points.iter().enumerate() {
        let (dist, k) = distance_to_pi_multiple(curve.beta_p(i));
        let inside = dist <= config.edge_tol && p.alpha > config.alpha_floor;
        match (&mut open, inside) {
            (Some(band), true) if band.multiple_of_pi == k => band.f_high = p.frequency,
            (slot, true) => {
                if let Some(done) = slot.take() {
                    bands.push(done);
                }
                *slot = Some(Stopband {
                    f_low: p.frequency,
                    f_high: p.frequency,
                    multiple_of_pi: k,
                    kind: StopbandKind::Strict,
                });
            }
            (slot, false) => {
                if let Some(done) = slot.take() {
                    bands.push(done);
                }
            }
        }
    }
    bands.extend(open);
    bands
}

fn transition_bands(curve: &DispersionCurve, config: &StopbandConfig) -> Vec<Stopband> {
    let alpha: Vec<f64> = curve.points.iter().map(|p| p.alpha).collect();
    let n = alpha.len();
    let mut bands: Vec<Stopband> = Vec::new();
    if n < 3 {
        return bands;
    }
    for i in 1..n - 1 {
        if !(alpha[i] >= alpha[i - 1] && alpha[i] > alpha[i + 1]) {
            continue;
        }
        if alpha[i] <= config.alpha_floor {
            continue;
        }
        let (dist, k) = distance_to_pi_multiple(curve.beta_p(i));
        if dist > config.transition_tol {
            continue;
        }

        // Walk down each flank to the neighbouring trough.
        let mut lo = i;
        while lo > 0 && alpha[lo - 1] <= alpha[lo] {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < n && alpha[hi + 1] <= alpha[hi] {
            hi += 1;
        }
        let base = alpha[lo].max(alpha[hi]);
        if alpha[i] - base < config.min_prominence * alpha[i] {
            continue;
        }

        let half = 0.5 * (alpha[i] + base);
        let mut left = i;
        while left > lo && alpha[left - 1] >= half {
            left -= 1;
        }
        let mut right = i;
        while right < hi && alpha[right + 1] >= half {
            right += 1;
        }
        let band = Stopband {
            f_low: curve.points[left].frequency,
            f_high: curve.points[right].frequency,
            multiple_of_pi: k,
            kind: StopbandKind::Transition,
        };
        if bands.last() != Some(&band) {
            bands.push(band);
        }
    }
    bands
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::extract::OrientationRule;
    use crate::sweep::{shift_space_harmonic, DispersionPoint, PointFlags};

    const P: f64 = 0.006;

    fn curve(samples: &[(f64, f64)]) -> DispersionCurve {
        let points = samples
            .iter()
            .enumerate()
            .map(|(i, &(bp, alpha))| DispersionPoint {
                frequency: 1e9 * (i + 1) as f64,
                beta: bp / P,
                alpha,
                beta_p: bp,
                n_samples: 1,
                sigma_beta: 0.0,
                sigma_alpha: 0.0,
                mean_condition: 1.0,
                max_residual: None,
                flags: PointFlags::default(),
                orientation: OrientationRule::Magnitude,
            })
            .collect();
        DispersionCurve {
            points,
            period: P,
            harmonic: 0,
            branch_anchor: String::new(),
            stopbands: vec![],
            warnings: vec![],
        }
    }

    #[test]
    fn passband_only_has_no_bands() {
        let c = curve(&[(0.5, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        let out = detect_stopbands(&c, StopbandMode::Lossless, &StopbandConfig::default());
        assert!(out.stopbands.is_empty());
    }

    #[test]
    fn strict_band_spans_pinned_run() {
        let c = curve(&[
            (2.9, 0.0),
            (3.1, 0.0),
            (PI, 3.0),
            (PI, 6.0),
            (PI, 2.0),
            (3.2, 0.0),
            (3.5, 0.0),
        ]);
        let out = detect_stopbands(&c, StopbandMode::Lossless, &StopbandConfig::default());
        assert_eq!(
            out.stopbands,
            vec![Stopband {
                f_low: 3e9,
                f_high: 5e9,
                multiple_of_pi: 1,
                kind: StopbandKind::Strict
            }]
        );
    }

    #[test]
    fn pinned_phase_without_attenuation_is_not_a_band() {
        let c = curve(&[(PI, 0.0), (PI, 0.0), (3.0, 0.0)]);
        let out = detect_stopbands(&c, StopbandMode::Lossless, &StopbandConfig::default());
        assert!(out.stopbands.is_empty());
    }

    #[test]
    fn evanescent_start_is_a_zeroth_band() {
        let c = curve(&[(0.0, 50.0), (0.0, 20.0), (0.3, 0.0), (0.6, 0.0)]);
        let out = detect_stopbands(&c, StopbandMode::Lossless, &StopbandConfig::default());
        assert_eq!(out.stopbands.len(), 1);
        assert_eq!(out.stopbands[0].multiple_of_pi, 0);
        assert_eq!(out.stopbands[0].f_high, 2e9);
    }

    #[test]
    fn harmonic_shift_moves_multiple_by_two() {
        let c = curve(&[(3.0, 0.0), (PI, 4.0), (3.3, 0.0)]);
        let s = shift_space_harmonic(&c, -1);
        let out = detect_stopbands(&s, StopbandMode::Lossless, &StopbandConfig::default());
        assert_eq!(out.stopbands[0].multiple_of_pi, -1);
    }

    #[test]
    fn lossy_peak_becomes_transition() {
        let c = curve(&[
            (2.6, 1.0),
            (2.8, 1.5),
            (3.0, 4.0),
            (3.15, 6.0),
            (3.3, 4.2),
            (3.5, 1.6),
            (3.7, 1.2),
        ]);
        let cfg = StopbandConfig::default();
        assert!(detect_stopbands(&c, StopbandMode::Lossless, &cfg)
            .stopbands
            .is_empty());
        let out = detect_stopbands(&c, StopbandMode::Lossy, &cfg);
        assert_eq!(out.stopbands.len(), 1);
        let band = out.stopbands[0];
        assert_eq!(band.kind, StopbandKind::Transition);
        assert_eq!(band.multiple_of_pi, 1);
        assert_eq!((band.f_low, band.f_high), (3e9, 5e9));
    }

    #[test]
    fn peak_far_from_pi_multiple_is_ignored() {
        let c = curve(&[(1.2, 1.0), (1.5, 4.0), (1.8, 1.0)]);
        let out = detect_stopbands(&c, StopbandMode::Lossy, &StopbandConfig::default());
        assert!(out.stopbands.is_empty());
    }
}
