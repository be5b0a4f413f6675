//! Complex propagation constants of uniform and periodic guides from
//! three period-spaced field samples.
//!
//! The crate is organised bottom-up:
//!
//! * [`extract`] solves the per-point Floquet quadratic and turns the forward
//!   root into a phase constant `beta` (rad/m) and attenuation `alpha` (Np/m).
//! * [`oracles`] holds the independent ground truth: the closed-form TE10
//!   propagation constant and a transfer-matrix Bloch eigenvalue.
//! * [`synth`] builds field traces with known answers, including interior
//!   fields of finite cascades of unit cells.
//! * [`trace_io`] reads and writes traces and cuts them into triplets.
//! * [`sweep`] aggregates many triplets per frequency and assembles
//!   branch-tracked dispersion curves.
//!
//! All quantities are SI internally: metres, hertz, rad/m and Np/m.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extract;
pub mod oracles;
pub mod sweep;
pub mod synth;
pub mod trace;
pub mod trace_io;

pub use error::{Error, ErrorClass};
pub use extract::{
    estimate_propagation, multimode_residual, orient_roots, solve_u_pair, ExtractConfig,
    ExtractError, OrientationConfig, OrientationRule, PropagationEstimate, RootPair, SampleTriplet,
};
pub use oracles::{
    bloch_kz, cell_abcd, element_abcd, te10_kz, Abcd, CellElement, LayerSpec, OracleError,
    ShuntElementSpec, UnitCellSpec, WaveguideSpec,
};
pub use trace::{Component, FieldTrace, TraceError};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 1.256_637_062_12e-6;
