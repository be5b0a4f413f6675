use super::{
    aggregate_frequency, detect_stopbands, shift_space_harmonic, unwrap_curve, AggregateConfig,
    AnchorPolicy, DispersionCurve, StopbandConfig, StopbandMode, SweepError,
};
use crate::trace::FieldTrace;
use crate::trace_io::triplets_from_trace;

/// Relative tolerance when checking that traces share one period.
const PERIOD_MATCH_TOL: f64 = 1e-12;

/// Everything [`extract_curve`] needs besides the traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub aggregate: AggregateConfig,
    pub anchor: AnchorPolicy,
    pub stopband_mode: StopbandMode,
    pub stopbands: StopbandConfig,
    /// Space harmonic applied to the finished curve.
    pub harmonic: i64,
    /// Samples per period, overriding `period / dz` of every trace.
    pub stride_override: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            aggregate: AggregateConfig::default(),
            anchor: AnchorPolicy::LowestFrequency,
            stopband_mode: StopbandMode::Lossless,
            stopbands: StopbandConfig::default(),
            harmonic: 0,
            stride_override: None,
        }
    }
}

/// Full pipeline from traces to an annotated dispersion curve.
///
/// Traces are grouped by exact frequency; triplets from every trace at one
/// frequency (several components or transverse positions) are pooled. The
/// result does not depend on the order of `traces`.
pub fn extract_curve(
    traces: &[FieldTrace],
    config: &SweepConfig,
) -> Result<DispersionCurve, SweepError> {
    let mut order: Vec<&FieldTrace> = traces.iter().collect();
    order.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));

    let mut period: Option<f64> = None;
    let mut points = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let frequency = order[i].frequency;
        let mut pooled = Vec::new();
        while i < order.len() && order[i].frequency == frequency {
            let trace = order[i];
            trace.validate()?;
            let triplets = triplets_from_trace(trace, config.stride_override)?;
            if let Some(first) = triplets.first() {
                let p = first.triplet.period;
                match period {
                    None => period = Some(p),
                    Some(q) if (p - q).abs() > PERIOD_MATCH_TOL * q => {
                        return Err(SweepError::InconsistentPeriod(q, p))
                    }
                    Some(_) => {}
                }
            }
            pooled.extend(triplets);
            i += 1;
        }
        let Some(p) = period else {
            return Err(SweepError::NoValidTriplets {
                frequency,
                rejected: 0,
            });
        };
        points.push(aggregate_frequency(
            frequency,
            &pooled,
            p,
            None,
            &config.aggregate,
        )?);
    }

    let period = period.ok_or(SweepError::TooFewPoints { needed: 2, got: 0 })?;
    let curve = unwrap_curve(points, period, config.anchor)?;
    let curve = detect_stopbands(&curve, config.stopband_mode, &config.stopbands);
    Ok(shift_space_harmonic(&curve, config.harmonic))
}
