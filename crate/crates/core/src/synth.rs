//! Field traces with known propagation constants.
//!
//! Fields are scalar modal amplitudes: the transverse profile of the guided
//! mode is a common factor that cancels in the three-point ratio, so the
//! total modal voltage (standing in for `Ey`) or current (`Hx`) along the axis
//! carries all the information the extractor uses.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracles::{wave_impedance, Abcd, CellElement, OracleError, UnitCellSpec};
use crate::trace::{stride_for, Component, FieldTrace, TraceError};

/// Amplitude growth, relative to the source, treated as a resonance blow-up.
pub const OVERFLOW_RATIO: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid sampling grid: {0}")]
    InvalidGrid(String),
    #[error("grid step {dz:e} m does not divide length {length:e} m")]
    GridMisaligned { length: f64, dz: f64 },
    #[error("cell count must be at least 1")]
    InvalidCellCount,
    #[error("reflection coefficient magnitude {0} exceeds 1")]
    InvalidReflection(f64),
    #[error("noise level must be non-negative and finite, got {0}")]
    InvalidNoise(f64),
    #[error("modal amplitudes exceed {OVERFLOW_RATIO:e} x source (resonance blow-up)")]
    ResonanceOverflow,
    #[error("sampling window is shorter than three points")]
    WindowTooShort,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Load at the far end of a finite cascade, referred to the last layer's
/// wave impedance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    Matched,
    Short,
    Open,
    Reflection(Complex64),
}

impl Termination {
    pub fn reflection(gamma: Complex64) -> Result<Self, SynthError> {
        if !gamma.is_finite() || gamma.norm() > 1.0 {
            return Err(SynthError::InvalidReflection(gamma.norm()));
        }
        Ok(Termination::Reflection(gamma))
    }

    pub fn reflection_coefficient(&self) -> Complex64 {
        match *self {
            Termination::Matched => Complex64::new(0.0, 0.0),
            Termination::Short => Complex64::new(-1.0, 0.0),
            Termination::Open => Complex64::new(1.0, 0.0),
            Termination::Reflection(g) => g,
        }
    }

    /// `(V, I)` at the load for unit incident-plus-reflected scale.
    fn load_state(&self, impedance: Complex64) -> (Complex64, Complex64) {
        let gamma = self.reflection_coefficient();
        (1.0 + gamma, (1.0 - gamma) / impedance)
    }
}

/// `count` points starting at `z_start`, spaced `dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub z_start: f64,
    pub dz: f64,
    pub count: usize,
}

/// `forward e^{-j kz z} + backward e^{+j kz z}` on a grid.
pub fn synth_uniform_trace(
    kz: Complex64,
    forward_amp: Complex64,
    backward_amp: Complex64,
    grid: Grid,
    period: f64,
    freq: f64,
) -> Result<FieldTrace, SynthError> {
    if grid.count < 3 {
        return Err(SynthError::InvalidGrid(format!("count {} < 3", grid.count)));
    }
    if !(grid.dz.is_finite() && grid.dz > 0.0) {
        return Err(SynthError::InvalidGrid(format!("dz {}", grid.dz)));
    }
    stride_for(period, grid.dz)?;
    let j = Complex64::i();
    let values = (0..grid.count)
        .map(|n| {
            let z = grid.z_start + n as f64 * grid.dz;
            forward_amp * (-j * kz * z).exp() + backward_amp * (j * kz * z).exp()
        })
        .collect();
    Ok(FieldTrace::new(
        freq,
        Component::Ey,
        grid.z_start,
        grid.dz,
        values,
        period,
    )?)
}

/// Which line quantity a periodic trace samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModalQuantity {
    /// Modal voltage, proportional to the transverse electric field.
    Voltage,
    /// Modal current, proportional to the transverse magnetic field.
    Current,
}

impl ModalQuantity {
    pub fn component(self) -> Component {
        match self {
            ModalQuantity::Voltage => Component::Ey,
            ModalQuantity::Current => Component::Hx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOptions {
    pub quantity: ModalQuantity,
    /// Cells trimmed from each end of the structure before sampling.
    pub margin_cells: f64,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        Self {
            quantity: ModalQuantity::Voltage,
            margin_cells: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Section {
    start: f64,
    length: f64,
    kz: Complex64,
    impedance: Complex64,
    /// `(V, I)` at the downstream end.
    right: (Complex64, Complex64),
}

/// Voltage and current everywhere in a finite, terminated cascade driven by
/// a forward wave of given amplitude entering at `z = 0`.
#[derive(Debug, Clone)]
pub struct CascadeField {
    sections: Vec<Section>,
    length: f64,
}

impl CascadeField {
    pub fn solve(
        cell: &UnitCellSpec,
        n_cells: usize,
        termination: Termination,
        source_amp: Complex64,
        freq: f64,
    ) -> Result<Self, SynthError> {
        if n_cells == 0 {
            return Err(SynthError::InvalidCellCount);
        }
        let z_ref = wave_impedance(freq, &cell.reference_medium())?;

        let mut layers = Vec::new();
        for element in cell.elements() {
            if let CellElement::Layer(layer) = element {
                let kz = crate::oracles::te10_kz(freq, &layer.medium)?;
                let impedance = wave_impedance(freq, &layer.medium)?;
                layers.push((layer.length, kz, impedance));
            }
        }
        let (_, _, z_last) = *layers.last().expect("validated cell has a layer");

        // Walk from the load back to the source.
        let (mut v, mut i) = termination.load_state(z_last);
        let mut reversed = Vec::with_capacity(layers.len() * n_cells);
        for _ in 0..n_cells {
            for element in cell.elements().iter().rev() {
                match element {
                    CellElement::Layer(layer) => {
                        let kz = crate::oracles::te10_kz(freq, &layer.medium)?;
                        let impedance = wave_impedance(freq, &layer.medium)?;
                        reversed.push(Section {
                            start: 0.0,
                            length: layer.length,
                            kz,
                            impedance,
                            right: (v, i),
                        });
                        (v, i) = Abcd::line(kz, impedance, layer.length).apply(v, i);
                    }
                    CellElement::Shunt(shunt) => {
                        i += shunt.normalized_admittance / z_ref * v;
                    }
                }
            }
        }
        let mut sections: Vec<Section> = reversed.into_iter().rev().collect();

        let incident = (v + sections[0].impedance * i) * 0.5;
        let scale = source_amp / incident;
        if !scale.is_finite() {
            return Err(SynthError::ResonanceOverflow);
        }
        let mut z = 0.0;
        for s in &mut sections {
            s.start = z;
            z += s.length;
            s.right = (s.right.0 * scale, s.right.1 * scale);
        }
        let field = Self {
            sections,
            length: z,
        };

        let limit = OVERFLOW_RATIO * source_amp.norm();
        let too_big = field.sections.iter().any(|s| {
            let (v, i) = field.state_in_section_index(s, 0.0);
            !(v.is_finite() && i.is_finite()) || v.norm().max((s.impedance * i).norm()) > limit
        });
        if too_big {
            return Err(SynthError::ResonanceOverflow);
        }
        Ok(field)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    /// `(start, length)` of a layer section, metres.
    pub fn section_span(&self, index: usize) -> (f64, f64) {
        let s = &self.sections[index];
        (s.start, s.length)
    }

    fn state_in_section_index(&self, s: &Section, offset: f64) -> (Complex64, Complex64) {
        let (v, i) = s.right;
        Abcd::line(s.kz, s.impedance, s.length - offset).apply(v, i)
    }

    /// `(V, I)` at `offset` metres past the start of a section.
    pub fn state_in_section(&self, index: usize, offset: f64) -> (Complex64, Complex64) {
        self.state_in_section_index(&self.sections[index], offset)
    }

    /// Forward and backward voltage amplitudes at the start of a section.
    pub fn section_amplitudes(&self, index: usize) -> (Complex64, Complex64) {
        let s = &self.sections[index];
        let (v, i) = self.state_in_section(index, 0.0);
        ((v + s.impedance * i) * 0.5, (v - s.impedance * i) * 0.5)
    }

    /// Samples the chosen quantity on a grid of step `dz` from `z = 0` to the
    /// load, inclusive. Every section length must be a whole number of steps.
    pub fn sample(&self, dz: f64, quantity: ModalQuantity) -> Result<Vec<Complex64>, SynthError> {
        let pick = |(v, i): (Complex64, Complex64)| match quantity {
            ModalQuantity::Voltage => v,
            ModalQuantity::Current => i,
        };
        let mut values = Vec::new();
        for (index, s) in self.sections.iter().enumerate() {
            let steps = stride_for(s.length, dz).map_err(|_| SynthError::GridMisaligned {
                length: s.length,
                dz,
            })?;
            for j in 0..steps {
                values.push(pick(self.state_in_section(index, j as f64 * dz)));
            }
        }
        let last = self.sections.last().expect("non-empty cascade");
        values.push(pick(last.right));
        Ok(values)
    }
}

/// Interior field of `n_cells` copies of `cell` driven from `z = 0` and
/// terminated at the far end.
pub fn synth_periodic_trace(
    cell: &UnitCellSpec,
    n_cells: usize,
    termination: Termination,
    source_amp: Complex64,
    freq: f64,
    dz: f64,
    options: &PeriodicOptions,
) -> Result<FieldTrace, SynthError> {
    if !(dz.is_finite() && dz > 0.0) {
        return Err(SynthError::InvalidGrid(format!("dz {dz}")));
    }
    let field = CascadeField::solve(cell, n_cells, termination, source_amp, freq)?;
    let values = field.sample(dz, options.quantity)?;
    let stride = stride_for(cell.period(), dz)?;
    let margin = (options.margin_cells * stride as f64).round().max(0.0) as usize;
    if values.len() < 2 * margin + 3 {
        return Err(SynthError::WindowTooShort);
    }
    let window = values[margin..values.len() - margin].to_vec();
    Ok(FieldTrace::new(
        freq,
        options.quantity.component(),
        margin as f64 * dz,
        dz,
        window,
        cell.period(),
    )?)
}

/// Adds complex Gaussian noise of standard deviation
/// `relative_sigma * max|value|` to every sample.
pub fn add_noise(
    trace: &FieldTrace,
    relative_sigma: f64,
    seed: u64,
) -> Result<FieldTrace, SynthError> {
    if !(relative_sigma.is_finite() && relative_sigma >= 0.0) {
        return Err(SynthError::InvalidNoise(relative_sigma));
    }
    if relative_sigma == 0.0 {
        return Ok(trace.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Per-component deviation so that E|n|^2 = sigma^2.
    let sigma = relative_sigma * trace.max_norm() / std::f64::consts::SQRT_2;
    let mut noisy = trace.clone();
    for v in &mut noisy.values {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *v += Complex64::new(re, im) * sigma;
    }
    Ok(noisy)
}
