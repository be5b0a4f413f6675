//! Crate-wide error with a coarse class and a stable tag per failure kind.

use thiserror::Error;

use crate::extract::ExtractError;
use crate::oracles::OracleError;
use crate::sweep::SweepError;
use crate::synth::SynthError;
use crate::trace::TraceError;
use crate::trace_io::TraceIoError;

/// Whether a failure is the caller's input or the numerics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    TraceIo(#[from] TraceIoError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use ErrorClass::*;
        match self {
            Error::Extract(e) => extract_class(e),
            Error::Oracle(e) => oracle_class(e),
            Error::Synth(e) => match e {
                SynthError::ResonanceOverflow => Numerical,
                SynthError::Oracle(o) => oracle_class(o),
                _ => Input,
            },
            Error::Trace(_) | Error::TraceIo(_) => Input,
            Error::Sweep(e) => match e {
                SweepError::NoValidTriplets { .. } => Numerical,
                SweepError::Extract(x) => extract_class(x),
                SweepError::Oracle(o) => oracle_class(o),
                _ => Input,
            },
        }
    }

    /// Single-word name of the failure, e.g. `PeriodGridMismatchError`.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Extract(e) => extract_tag(e),
            Error::Oracle(e) => oracle_tag(e),
            Error::Synth(e) => match e {
                SynthError::InvalidGrid(_) => "InvalidGridError",
                SynthError::GridMisaligned { .. } => "GridMisalignedError",
                SynthError::InvalidCellCount => "InvalidCellCountError",
                SynthError::InvalidReflection(_) => "InvalidReflectionError",
                SynthError::InvalidNoise(_) => "InvalidNoiseError",
                SynthError::ResonanceOverflow => "ResonanceOverflowError",
                SynthError::WindowTooShort => "WindowTooShortError",
                SynthError::Oracle(o) => oracle_tag(o),
                SynthError::Trace(t) => trace_tag(t),
            },
            Error::Trace(e) => trace_tag(e),
            Error::TraceIo(e) => trace_io_tag(e),
            Error::Sweep(e) => match e {
                SweepError::NoValidTriplets { .. } => "NoValidTripletsError",
                SweepError::TooFewPoints { .. } => "TooFewPointsError",
                SweepError::NonMonotonicFrequency(_) => "NonMonotonicFrequencyError",
                SweepError::InconsistentPeriod(..) => "InconsistentPeriodError",
                SweepError::NoOverlap => "NoOverlapError",
                SweepError::CurveFormat { .. } => "CurveFormatError",
                SweepError::Extract(x) => extract_tag(x),
                SweepError::Oracle(o) => oracle_tag(o),
                SweepError::Trace(t) => trace_tag(t),
                SweepError::TraceIo(t) => trace_io_tag(t),
                SweepError::Io(_) => "IoError",
            },
        }
    }
}

fn extract_class(e: &ExtractError) -> ErrorClass {
    match e {
        ExtractError::InvalidPeriod(_) | ExtractError::NonFiniteSample => ErrorClass::Input,
        _ => ErrorClass::Numerical,
    }
}

fn oracle_class(e: &OracleError) -> ErrorClass {
    match e {
        OracleError::ZeroImpedance(_)
        | OracleError::DegenerateCell
        | OracleError::NonFiniteAdmittance => ErrorClass::Numerical,
        _ => ErrorClass::Input,
    }
}

fn extract_tag(e: &ExtractError) -> &'static str {
    match e {
        ExtractError::InvalidPeriod(_) => "InvalidPeriodError",
        ExtractError::NonFiniteSample => "NonFiniteSampleError",
        ExtractError::CenterNode { .. } => "CenterNodeError",
        ExtractError::DegenerateTriplet { .. } => "DegenerateTripletError",
        ExtractError::AmbiguousOrientation { .. } => "AmbiguousOrientationError",
        ExtractError::NonReciprocalRoots(_) => "NonReciprocalRootsError",
        ExtractError::SingularAmplitudeSystem => "SingularAmplitudeSystemError",
    }
}

fn oracle_tag(e: &OracleError) -> &'static str {
    match e {
        OracleError::InvalidFrequency(_) => "InvalidFrequencyError",
        OracleError::InvalidMedium(_) => "InvalidMediumError",
        OracleError::InvalidLength(_) => "InvalidLengthError",
        OracleError::NoLayers => "NoLayersError",
        OracleError::MismatchedCutoff(..) => "MismatchedCutoffError",
        OracleError::ZeroImpedance(_) => "ZeroImpedanceError",
        OracleError::DegenerateCell => "DegenerateCellError",
        OracleError::NonFiniteAdmittance => "NonFiniteAdmittanceError",
    }
}

fn trace_tag(e: &TraceError) -> &'static str {
    match e {
        TraceError::InvalidStep(_) => "InvalidStepError",
        TraceError::InvalidPeriod(_) => "InvalidPeriodError",
        TraceError::InvalidFrequency(_) => "InvalidFrequencyError",
        TraceError::Empty => "EmptyTraceError",
        TraceError::NonFinite(_) => "NonFiniteSampleError",
        TraceError::PeriodGridMismatch { .. } => "PeriodGridMismatchError",
    }
}

fn trace_io_tag(e: &TraceIoError) -> &'static str {
    match e {
        TraceIoError::Io { .. } | TraceIoError::Stream(_) => "IoError",
        TraceIoError::Parse { .. } => "ParseError",
        TraceIoError::Header(_) => "HeaderError",
        TraceIoError::Grid { .. } => "GridError",
        TraceIoError::Mapping { .. } => "MappingError",
        TraceIoError::InvalidMapping(_) => "InvalidMappingError",
        TraceIoError::Trace(t) => trace_tag(t),
    }
}
