use num_complex::Complex64;

use super::{DispersionPoint, PointFlags, SweepError};
use crate::extract::{
    multimode_residual, orient_roots, reciprocal_roots, unordered_roots, ExtractConfig,
    ExtractError, OrientationConfig, OrientationRule, RootPair,
};
use crate::trace_io::IndexedTriplet;

/// Thresholds for [`aggregate_frequency`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateConfig {
    pub extract: ExtractConfig,
    /// Samples below this fraction of the largest sample count as zero.
    pub degenerate_rel_floor: f64,
    /// Mean condition below this sets `low_condition`.
    pub low_condition: f64,
    /// Largest multimode residual above this sets `high_residual`.
    pub high_residual: f64,
    /// `|u_f - u_b|` below this sets `band_edge`.
    pub band_edge_separation: f64,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        Self {
            extract: ExtractConfig::default(),
            degenerate_rel_floor: 1e-30,
            low_condition: 0.05,
            high_residual: 1e-3,
            band_edge_separation: 1e-2,
        }
    }
}

struct Accepted<'a> {
    sample: &'a IndexedTriplet,
    roots: [Complex64; 2],
    condition: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64], mean: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

fn nearest(roots: [Complex64; 2], target: Complex64) -> Complex64 {
    if (roots[0] - target).norm() <= (roots[1] - target).norm() {
        roots[0]
    } else {
        roots[1]
    }
}

/// Forward root shared by every triplet at one frequency.
///
/// Each triplet gives `s = u + 1/u`; their condition-weighted mean fixes a
/// consensus root pair. The magnitude rule is applied only when `ln|u|`
/// stands clear of its own scatter across triplets, so noise on a lossless
/// passband cannot flip the orientation.
fn consensus_orientation(
    accepted: &[Accepted<'_>],
    config: &OrientationConfig,
) -> (Complex64, OrientationRule, bool) {
    let mut weighted = Complex64::new(0.0, 0.0);
    let mut total = 0.0;
    for a in accepted {
        let w = a.condition.min(1.0).powi(2);
        weighted += (a.roots[0] + a.roots[1]) * w;
        total += w;
    }
    let s = if total > 0.0 {
        weighted / total
    } else {
        accepted[0].roots[0] + accepted[0].roots[1]
    };
    let [big, small] = reciprocal_roots(s);

    let logs: Vec<f64> = accepted
        .iter()
        .map(|a| nearest(a.roots, big).norm().ln())
        .collect();
    let log_mean = mean(&logs);
    let stderr = sample_std(&logs, log_mean) / (logs.len() as f64).sqrt();
    let phases: Vec<f64> = accepted
        .iter()
        .map(|a| (nearest(a.roots, big) / big).arg())
        .collect();
    let phase_stderr = sample_std(&phases, mean(&phases)) / (phases.len() as f64).sqrt();

    let widened = OrientationConfig {
        mag_tie_eps: config.mag_tie_eps.max(3.0 * stderr),
        phase_tie_eps: config.phase_tie_eps.max(3.0 * phase_stderr),
        reference: None,
    };
    match orient_roots([big, small], &widened) {
        Ok(pair) => (pair.u_forward, pair.orientation_rule, false),
        Err(_) => {
            // Band edge: keep the root on the non-negative phase side.
            let forward = if big.arg() >= 0.0 { big } else { small };
            (forward, OrientationRule::PhaseSign, true)
        }
    }
}

/// Aggregates every usable triplet at one frequency into a single point.
///
/// Triplets centred on nodes or carrying no signal are skipped. All others
/// are oriented toward one shared forward root (the caller's `reference`
/// when given, otherwise a consensus), their phases are aligned to that
/// root's branch, and `beta`/`alpha` are the arithmetic means of the
/// per-triplet values.
pub fn aggregate_frequency(
    frequency: f64,
    samples: &[IndexedTriplet],
    period: f64,
    reference: Option<Complex64>,
    config: &AggregateConfig,
) -> Result<DispersionPoint, SweepError> {
    let max_norm = samples
        .iter()
        .map(|s| s.triplet.max_norm())
        .fold(0.0, f64::max);
    let extract = ExtractConfig {
        degenerate_floor: config
            .extract
            .degenerate_floor
            .max(config.degenerate_rel_floor * max_norm),
        ..config.extract
    };

    let mut accepted = Vec::with_capacity(samples.len());
    let mut rejected = 0;
    for sample in samples {
        match unordered_roots(&sample.triplet, &extract) {
            Ok(roots) => accepted.push(Accepted {
                sample,
                roots,
                condition: sample.triplet.condition(extract.degenerate_floor),
            }),
            Err(ExtractError::CenterNode { .. } | ExtractError::DegenerateTriplet { .. }) => {
                rejected += 1
            }
            Err(e) => return Err(e.into()),
        }
    }
    if accepted.is_empty() {
        return Err(SweepError::NoValidTriplets {
            frequency,
            rejected,
        });
    }

    let (anchor, rule, ambiguous) = match reference {
        Some(r) => (r, OrientationRule::CallerOverride, false),
        None => consensus_orientation(&accepted, &config.extract.orientation),
    };

    let anchor_phase = anchor.arg();
    let mut betas = Vec::with_capacity(accepted.len());
    let mut alphas = Vec::with_capacity(accepted.len());
    let mut conditions = Vec::with_capacity(accepted.len());
    let mut max_residual: Option<f64> = None;
    for a in &accepted {
        let u = nearest(a.roots, anchor);
        let phase = anchor_phase + (u / anchor).arg();
        betas.push(phase / period);
        alphas.push(u.norm().ln() / period);
        conditions.push(a.condition);

        if let Some(quad) = a.sample.quadruple() {
            let pair = RootPair {
                u_forward: u,
                u_backward: u.inv(),
                orientation_rule: rule,
            };
            match multimode_residual(quad, &pair) {
                Ok(r) => max_residual = Some(max_residual.map_or(r, |m: f64| m.max(r))),
                Err(ExtractError::SingularAmplitudeSystem) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }

    let beta = mean(&betas);
    let alpha = mean(&alphas);
    let mean_condition = mean(&conditions);
    let u_mean = Complex64::from_polar((alpha * period).exp(), beta * period);
    let separation = (u_mean - u_mean.inv()).norm();

    let flags = PointFlags {
        band_edge: ambiguous || separation < config.band_edge_separation,
        low_condition: mean_condition < config.low_condition,
        high_residual: max_residual.is_some_and(|r| r > config.high_residual),
        orientation_ambiguous: ambiguous,
    };

    Ok(DispersionPoint {
        frequency,
        beta,
        alpha,
        beta_p: beta * period,
        n_samples: accepted.len(),
        sigma_beta: sample_std(&betas, beta),
        sigma_alpha: sample_std(&alphas, alpha),
        mean_condition,
        max_residual,
        flags,
        orientation: rule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{add_noise, synth_uniform_trace, Grid};
    use crate::trace_io::triplets_from_trace;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn uniform_samples(kz: Complex64, backward: Complex64, count: usize) -> Vec<IndexedTriplet> {
        let grid = Grid {
            z_start: 0.0,
            dz: 2.5e-4,
            count,
        };
        let t = synth_uniform_trace(kz, c(1.0, 0.0), backward, grid, 0.006, 25e9).unwrap();
        triplets_from_trace(&t, None).unwrap()
    }

    #[test]
    fn noiseless_single_mode_has_no_spread() {
        let kz = c(346.9, 0.0);
        let samples = uniform_samples(kz, c(0.0, 0.0), 448);
        assert!(samples.len() >= 400);
        let pt =
            aggregate_frequency(25e9, &samples, 0.006, None, &AggregateConfig::default()).unwrap();
        assert!(pt.sigma_beta <= 1e-9 * pt.beta, "{}", pt.sigma_beta);
        assert!((pt.beta - kz.re).abs() <= 1e-10 * kz.re);
        assert!(pt.alpha.abs() <= 1e-9);
        assert!(pt.flags.is_empty(), "{:?}", pt.flags);
        assert_eq!(pt.n_samples, samples.len());
        assert_eq!(pt.orientation, OrientationRule::PhaseSign);
    }

    #[test]
    fn standing_wave_nodes_are_skipped() {
        // Short-circuit style standing wave: exact nodes every half wavelength.
        let beta = PI / 0.006 / 2.0;
        let grid = Grid {
            z_start: 0.0,
            dz: 0.001,
            count: 40,
        };
        let t = synth_uniform_trace(c(beta, 0.0), c(1.0, 0.0), c(-1.0, 0.0), grid, 0.006, 25e9)
            .unwrap();
        let samples = triplets_from_trace(&t, None).unwrap();
        let pt =
            aggregate_frequency(25e9, &samples, 0.006, None, &AggregateConfig::default()).unwrap();
        assert!(pt.n_samples < samples.len());
        assert!((pt.beta - beta).abs() <= 1e-8 * beta);
    }

    #[test]
    fn all_nodes_is_an_error() {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let t = crate::extract::SampleTriplet::new(one, z, -one, 0.006).unwrap();
        let samples = vec![
            IndexedTriplet {
                index: 1,
                triplet: t,
                beyond: None
            };
            5
        ];
        let err = aggregate_frequency(25e9, &samples, 0.006, None, &AggregateConfig::default())
            .unwrap_err();
        assert!(matches!(
            err,
            SweepError::NoValidTriplets { rejected: 5, .. }
        ));
    }

    #[test]
    fn noisy_lossless_keeps_positive_orientation() {
        let kz = c(346.9, 0.0);
        let grid = Grid {
            z_start: 0.0,
            dz: 2.5e-4,
            count: 448,
        };
        let t = synth_uniform_trace(kz, c(1.0, 0.0), c(0.0, 0.0), grid, 0.006, 25e9).unwrap();
        for seed in 0..8 {
            let noisy = add_noise(&t, 1e-3, seed).unwrap();
            let samples = triplets_from_trace(&noisy, None).unwrap();
            let pt = aggregate_frequency(25e9, &samples, 0.006, None, &AggregateConfig::default())
                .unwrap();
            assert!(pt.beta > 0.0, "seed {seed}: {}", pt.beta);
            assert!(pt.sigma_beta / pt.beta < 1e-2);
        }
    }

    #[test]
    fn reference_selects_root() {
        let kz = c(346.9, 0.0);
        let samples = uniform_samples(kz, c(0.0, 0.0), 60);
        let reference = Complex64::from_polar(1.0, -kz.re * 0.006);
        let pt = aggregate_frequency(
            25e9,
            &samples,
            0.006,
            Some(reference),
            &AggregateConfig::default(),
        )
        .unwrap();
        assert_eq!(pt.orientation, OrientationRule::CallerOverride);
        assert!((pt.beta + kz.re).abs() <= 1e-9 * kz.re);
    }

    #[test]
    fn two_forward_modes_raise_residual_flag() {
        let p = 0.006;
        let grid = Grid {
            z_start: 0.0,
            dz: 5e-4,
            count: 100,
        };
        let a = synth_uniform_trace(
            c(PI / 3.0 / p, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
            grid,
            p,
            25e9,
        )
        .unwrap();
        let b = synth_uniform_trace(
            c(PI / 2.0 / p, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
            grid,
            p,
            25e9,
        )
        .unwrap();
        let mut mixed = a.clone();
        for (v, w) in mixed.values.iter_mut().zip(&b.values) {
            *v += w;
        }
        let samples = triplets_from_trace(&mixed, None).unwrap();
        let pt = aggregate_frequency(25e9, &samples, p, None, &AggregateConfig::default()).unwrap();
        assert!(pt.flags.high_residual);
    }

    #[test]
    fn lossless_band_edge_is_flagged() {
        // Floquet factor -1 (beta p = pi) exactly: standing pattern of period 2p.
        let p = 0.006;
        let samples = uniform_samples(c(PI / p, 0.0), c(0.0, 0.0), 80);
        let pt = aggregate_frequency(25e9, &samples, p, None, &AggregateConfig::default()).unwrap();
        assert!(pt.flags.band_edge);
        assert!(pt.flags.orientation_ambiguous);
        assert!((pt.beta_p.abs() - PI).abs() < 1e-6);
    }
}
