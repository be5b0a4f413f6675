//! Uniformly sampled complex field along a line parallel to the guide axis.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for "the period is an integer number of grid steps".
pub const GRID_ALIGNMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("grid step dz must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("structure period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("trace has no samples")]
    Empty,
    #[error("trace contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("period {period:e} m is {ratio} grid steps of {dz:e} m; expected a whole number")]
    PeriodGridMismatch { period: f64, dz: f64, ratio: f64 },
}

/// Field component a trace was sampled from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    Ex,
    Ey,
    Ez,
    Hx,
    Hy,
    Hz,
    Other(String),
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Component::Ex => "Ex",
            Component::Ey => "Ey",
            Component::Ez => "Ez",
            Component::Hx => "Hx",
            Component::Hy => "Hy",
            Component::Hz => "Hz",
            Component::Other(s) => s,
        };
        f.write_str(s)
    }
}

impl FromStr for Component {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "Ex" => Component::Ex,
            "Ey" => Component::Ey,
            "Ez" => Component::Ez,
            "Hx" => Component::Hx,
            "Hy" => Component::Hy,
            "Hz" => Component::Hz,
            other => Component::Other(other.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldTrace {
    /// Hz.
    pub frequency: f64,
    pub component: Component,
    /// `(x, y)` of the sampling line in metres. Metadata only.
    pub transverse_position: (f64, f64),
    pub z_start: f64,
    pub dz: f64,
    pub values: Vec<Complex64>,
    /// Period used for triplet spacing, metres.
    pub period: f64,
}

impl FieldTrace {
    pub fn new(
        frequency: f64,
        component: Component,
        z_start: f64,
        dz: f64,
        values: Vec<Complex64>,
        period: f64,
    ) -> Result<Self, TraceError> {
        let trace = Self {
            frequency,
            component,
            transverse_position: (0.0, 0.0),
            z_start,
            dz,
            values,
            period,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn with_position(mut self, x: f64, y: f64) -> Self {
        self.transverse_position = (x, y);
        self
    }

    /// Checks every invariant except period/grid alignment, which is allowed
    /// to fail on stored traces and is reported by [`Self::period_stride`].
    pub fn validate(&self) -> Result<(), TraceError> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(TraceError::InvalidFrequency(self.frequency));
        }
        if !(self.dz.is_finite() && self.dz > 0.0) {
            return Err(TraceError::InvalidStep(self.dz));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(TraceError::InvalidPeriod(self.period));
        }
        if self.values.is_empty() {
            return Err(TraceError::Empty);
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(TraceError::NonFinite(i));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn z_at(&self, index: usize) -> f64 {
        self.z_start + index as f64 * self.dz
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Number of grid steps per period.
    pub fn period_stride(&self) -> Result<usize, TraceError> {
        stride_for(self.period, self.dz)
    }

    pub fn is_period_aligned(&self) -> bool {
        self.period_stride().is_ok()
    }
}

/// `period / dz` as a whole number of steps, or a mismatch error.
pub fn stride_for(period: f64, dz: f64) -> Result<usize, TraceError> {
    let ratio = period / dz;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > GRID_ALIGNMENT_TOL * ratio {
        return Err(TraceError::PeriodGridMismatch { period, dz, ratio });
    }
    Ok(k as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(period: f64, dz: f64) -> FieldTrace {
        FieldTrace::new(
            1e9,
            Component::Ey,
            0.0,
            dz,
            vec![Complex64::new(1.0, 0.0); 5],
            period,
        )
        .unwrap()
    }

    #[test]
    fn stride_from_aligned_period() {
        assert_eq!(trace(0.006, 0.0005).period_stride().unwrap(), 12);
        assert_eq!(trace(0.001, 0.001).period_stride().unwrap(), 1);
    }

    #[test]
    fn half_step_period_rejected() {
        let err = trace(0.0015, 0.001).period_stride().unwrap_err();
        assert!(matches!(err, TraceError::PeriodGridMismatch { .. }));
        assert!(trace(0.0005, 0.001).period_stride().is_err());
    }

    #[test]
    fn invalid_fields_rejected() {
        let one = vec![Complex64::new(1.0, 0.0)];
        assert!(FieldTrace::new(1e9, Component::Ey, 0.0, 0.0, one.clone(), 1.0).is_err());
        assert!(FieldTrace::new(1e9, Component::Ey, 0.0, 1.0, vec![], 1.0).is_err());
        assert!(FieldTrace::new(0.0, Component::Ey, 0.0, 1.0, one.clone(), 1.0).is_err());
        assert!(FieldTrace::new(1e9, Component::Ey, 0.0, 1.0, one, -1.0).is_err());
    }

    #[test]
    fn component_labels_round_trip() {
        for label in ["Ex", "Ey", "Ez", "Hx", "Hy", "Hz", "Vmode"] {
            let c: Component = label.parse().unwrap();
            assert_eq!(c.to_string(), label);
        }
    }
}
