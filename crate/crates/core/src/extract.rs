//! Per-point extraction of the Floquet factor.
//!
//! A single Floquet mode travelling both ways satisfies
//! `u^2 E(z) - u [E(z+p) + E(z-p)] + E(z) = 0` with `u = exp(j k_z p)` and
//! `k_z = beta - j alpha`. The two roots are reciprocal; one belongs to the
//! forward wave and one to the backward wave. This module solves the
//! quadratic, decides which root is forward, and converts that root into
//! `(beta, alpha)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while extracting a propagation constant from one triplet.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),

    #[error("sample values must be finite")]
    NonFiniteSample,

    /// The centre sample sits on (or near) a field node; the quadratic's
    /// leading coefficient vanishes.
    #[error("centre sample is a field node: |E(z)|/max|E(z±p)| = {ratio:.3e} < {threshold:.1e}")]
    CenterNode { ratio: f64, threshold: f64 },

    #[error("all three samples are below the floor {floor:.3e}; no wave present")]
    DegenerateTriplet { floor: f64 },

    /// Both roots lie on the unit circle at phase 0 or pi (a lossless band
    /// edge). The roots are returned so the caller can still use them.
    #[error("forward/backward orientation is ambiguous at u = {:.6}{:+.6}i", roots[0].re, roots[0].im)]
    AmbiguousOrientation { roots: [Complex64; 2] },

    #[error("roots are not reciprocal: |u1 u2 - 1| = {0:.3e}")]
    NonReciprocalRoots(f64),

    /// `u_f^2 = 1`: forward and backward amplitudes cannot be separated.
    #[error("forward/backward amplitude system is singular (u^2 = 1)")]
    SingularAmplitudeSystem,
}

/// Three complex samples of one field component at `z - p`, `z`, `z + p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleTriplet {
    pub e_minus: Complex64,
    pub e_center: Complex64,
    pub e_plus: Complex64,
    /// Sample spacing in metres.
    pub period: f64,
}

impl SampleTriplet {
    pub fn new(
        e_minus: Complex64,
        e_center: Complex64,
        e_plus: Complex64,
        period: f64,
    ) -> Result<Self, ExtractError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(ExtractError::InvalidPeriod(period));
        }
        if ![e_minus, e_center, e_plus].iter().all(|v| v.is_finite()) {
            return Err(ExtractError::NonFiniteSample);
        }
        Ok(Self {
            e_minus,
            e_center,
            e_plus,
            period,
        })
    }

    /// `|E(z)| / max(|E(z-p)|, |E(z+p)|)`, the ranking metric for candidate
    /// sampling points. Large is good.
    pub fn condition(&self, floor: f64) -> f64 {
        let side = self.e_minus.norm().max(self.e_plus.norm()).max(floor);
        if side > 0.0 {
            self.e_center.norm() / side
        } else {
            f64::INFINITY
        }
    }

    /// Largest magnitude among the three samples.
    pub fn max_norm(&self) -> f64 {
        self.e_minus
            .norm()
            .max(self.e_center.norm())
            .max(self.e_plus.norm())
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            e_minus: self.e_minus * factor,
            e_center: self.e_center * factor,
            e_plus: self.e_plus * factor,
            period: self.period,
        }
    }

    /// Relative residual of `u` in the triplet's quadratic.
    pub fn quadratic_residual(&self, u: Complex64) -> f64 {
        let sum = self.e_minus + self.e_plus;
        let value = u * u * self.e_center - u * sum + self.e_center;
        let scale =
            u.norm_sqr() * self.e_center.norm() + u.norm() * sum.norm() + self.e_center.norm();
        if scale > 0.0 {
            value.norm() / scale
        } else {
            0.0
        }
    }
}

/// How the forward root was picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationRule {
    /// `|u| > 1`: the forward wave decays along +z.
    Magnitude,
    /// Lossless tie, broken by the positive-phase convention.
    PhaseSign,
    /// Root nearest to a caller-supplied reference.
    CallerOverride,
}

impl OrientationRule {
    /// True when the choice was conventional rather than physical, i.e. the
    /// other root is an equally valid reading of the data.
    pub fn is_tie(self) -> bool {
        !matches!(self, OrientationRule::Magnitude)
    }
}

/// Forward and backward Floquet factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootPair {
    pub u_forward: Complex64,
    pub u_backward: Complex64,
    pub orientation_rule: OrientationRule,
}

impl RootPair {
    pub fn product_error(&self) -> f64 {
        (self.u_forward * self.u_backward - 1.0).norm()
    }
}

/// Tie thresholds and the optional continuity reference for [`orient_roots`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationConfig {
    /// `|ln|u||` at or below this counts as `|u| = 1`.
    pub mag_tie_eps: f64,
    /// Distance of `arg u` from 0 or pi below which the phase rule cannot
    /// decide.
    pub phase_tie_eps: f64,
    /// Floquet factor of the forward wave at a neighbouring point; when set
    /// the nearest root wins.
    pub reference: Option<Complex64>,
}

impl Default for OrientationConfig {
    fn default() -> Self {
        Self {
            mag_tie_eps: 1e-9,
            phase_tie_eps: 1e-9,
            reference: None,
        }
    }
}

/// Thresholds for [`solve_u_pair`] and [`estimate_propagation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig {
    /// Minimum `|E(z)| / max(|E(z±p)|)` before the centre is treated as a node.
    pub node_threshold: f64,
    /// Absolute magnitude below which a sample counts as zero.
    pub degenerate_floor: f64,
    pub orientation: OrientationConfig,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            node_threshold: 1e-6,
            degenerate_floor: 1e-300,
            orientation: OrientationConfig::default(),
        }
    }
}

impl ExtractConfig {
    pub fn with_reference(mut self, reference: Option<Complex64>) -> Self {
        self.orientation.reference = reference;
        self
    }
}

/// Roots of `u^2 - s u + 1 = 0`, larger magnitude first.
///
/// The larger root is taken from the branch of `(s ± sqrt(s^2 - 4)) / 2`
/// that adds rather than cancels; the smaller is its reciprocal.
pub fn reciprocal_roots(s: Complex64) -> [Complex64; 2] {
    let disc = ((s - 2.0) * (s + 2.0)).sqrt();
    let q = if (s.conj() * disc).re >= 0.0 {
        (s + disc) * 0.5
    } else {
        (s - disc) * 0.5
    };
    [q, q.inv()]
}

/// Unordered roots of the triplet's quadratic after the node and
/// degeneracy checks.
pub fn unordered_roots(
    t: &SampleTriplet,
    config: &ExtractConfig,
) -> Result<[Complex64; 2], ExtractError> {
    let floor = config.degenerate_floor;
    if t.max_norm() <= floor {
        return Err(ExtractError::DegenerateTriplet { floor });
    }
    let ratio = t.condition(floor);
    if ratio < config.node_threshold {
        return Err(ExtractError::CenterNode {
            ratio,
            threshold: config.node_threshold,
        });
    }
    let s = (t.e_minus + t.e_plus) / t.e_center;
    Ok(reciprocal_roots(s))
}

/// Solves the three-point quadratic and orients the roots.
pub fn solve_u_pair(t: &SampleTriplet, config: &ExtractConfig) -> Result<RootPair, ExtractError> {
    let roots = unordered_roots(t, config)?;
    orient_roots(roots, &config.orientation)
}

/// Decides which of two reciprocal roots is the forward wave.
pub fn orient_roots(
    roots: [Complex64; 2],
    config: &OrientationConfig,
) -> Result<RootPair, ExtractError> {
    let [u1, u2] = roots;
    let product_error = (u1 * u2 - 1.0).norm();
    if !(product_error <= 1e-8) {
        return Err(ExtractError::NonReciprocalRoots(product_error));
    }
    let pair = |forward: Complex64, backward: Complex64, rule| RootPair {
        u_forward: forward,
        u_backward: backward,
        orientation_rule: rule,
    };

    if let Some(reference) = config.reference {
        let d1 = (u1 - reference).norm();
        let d2 = (u2 - reference).norm();
        // Equidistant roots carry no information from the reference.
        if (d1 - d2).abs() > 1e-12 * (d1 + d2) {
            return Ok(if d1 < d2 {
                pair(u1, u2, OrientationRule::CallerOverride)
            } else {
                pair(u2, u1, OrientationRule::CallerOverride)
            });
        }
    }

    let log_mag = u1.norm().ln();
    if log_mag.abs() > config.mag_tie_eps {
        return Ok(if log_mag > 0.0 {
            pair(u1, u2, OrientationRule::Magnitude)
        } else {
            pair(u2, u1, OrientationRule::Magnitude)
        });
    }

    let phase = u1.arg();
    if phase.abs() <= config.phase_tie_eps || (PI - phase.abs()) <= config.phase_tie_eps {
        return Err(ExtractError::AmbiguousOrientation { roots });
    }
    Ok(if phase > 0.0 {
        pair(u1, u2, OrientationRule::PhaseSign)
    } else {
        pair(u2, u1, OrientationRule::PhaseSign)
    })
}

/// One extraction result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationEstimate {
    /// Phase constant of the forward root, rad/m.
    pub beta: f64,
    /// Attenuation constant, Np/m.
    pub alpha: f64,
    pub u_pair: RootPair,
    pub condition: f64,
    /// Multimode residual, present when a fourth sample was supplied.
    pub residual: Option<f64>,
}

impl PropagationEstimate {
    /// `k_z = beta - j alpha`.
    pub fn kz(&self) -> Complex64 {
        Complex64::new(self.beta, -self.alpha)
    }
}

/// Converts a Floquet factor to `(beta, alpha)` on the given branch.
pub fn floquet_to_constants(u: Complex64, period: f64, branch_offset: i64) -> (f64, f64) {
    let beta = (u.arg() + 2.0 * PI * branch_offset as f64) / period;
    let alpha = u.norm().ln() / period;
    (beta, alpha)
}

/// Full per-point extraction on the principal branch shifted by
/// `branch_offset` turns.
pub fn estimate_propagation(
    t: &SampleTriplet,
    branch_offset: i64,
    config: &ExtractConfig,
) -> Result<PropagationEstimate, ExtractError> {
    let u_pair = solve_u_pair(t, config)?;
    let (beta, alpha) = floquet_to_constants(u_pair.u_forward, t.period, branch_offset);
    Ok(PropagationEstimate {
        beta,
        alpha,
        u_pair,
        condition: t.condition(config.degenerate_floor),
        residual: None,
    })
}

/// Checks a fourth period-spaced sample against the single-mode model.
///
/// `samples` are `E(z-p), E(z), E(z+p), E(z+2p)`. Forward and backward
/// amplitudes are fitted to `E(z)` and `E(z+p)`; the result is the misfit at
/// `z + 2p` relative to the largest sample.
pub fn multimode_residual(samples: [Complex64; 4], pair: &RootPair) -> Result<f64, ExtractError> {
    let u = pair.u_forward;
    let u_inv = u.inv();
    let denom = u - u_inv;
    if denom.norm() <= f64::EPSILON * u.norm() {
        return Err(ExtractError::SingularAmplitudeSystem);
    }
    let [_, e0, e1, e2] = samples;
    let backward = (e1 - e0 * u_inv) / denom;
    let forward = e0 - backward;
    let predicted = forward * u_inv * u_inv + backward * u * u;
    let scale = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((e2 - predicted).norm() / scale)
}
