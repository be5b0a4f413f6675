//! Independent dispersion references.
//!
//! * [`te10_kz`]: closed-form TE10 propagation constant of a homogeneously
//!   filled rectangular guide (or a plane wave when `kc = 0`).
//! * [`bloch_kz`]: Bloch eigenvalue of a cascaded unit cell, built from
//!   single-mode transmission-line ABCD matrices.
//!
//! Sign convention throughout: `k_z = beta - j alpha` with `alpha >= 0` for a
//! passive wave travelling toward +z.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::OrientationRule;
use crate::{MU_0, SPEED_OF_LIGHT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("layer length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("unit cell needs at least one layer")]
    NoLayers,
    #[error("layers in one cell must share the guide cutoff: {0} vs {1} rad/m")]
    MismatchedCutoff(f64, f64),
    #[error("wave impedance is singular: k_z = 0 at {0} Hz (cutoff)")]
    ZeroImpedance(f64),
    #[error("Bloch eigenvalue is a band-edge double root; orientation is ambiguous")]
    DegenerateCell,
    #[error("shunt admittance must be finite")]
    NonFiniteAdmittance,
}

/// Homogeneous filling of a guide with a given transverse cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    /// rad/m; `pi / a` for TE10, zero for a plane wave.
    pub cutoff_wavenumber: f64,
    pub rel_permittivity: f64,
    pub loss_tangent: f64,
}

impl WaveguideSpec {
    pub fn new(
        cutoff_wavenumber: f64,
        rel_permittivity: f64,
        loss_tangent: f64,
    ) -> Result<Self, OracleError> {
        if !(cutoff_wavenumber.is_finite() && cutoff_wavenumber >= 0.0) {
            return Err(OracleError::InvalidMedium(format!(
                "cutoff wavenumber {cutoff_wavenumber}"
            )));
        }
        if !(rel_permittivity.is_finite() && rel_permittivity > 0.0) {
            return Err(OracleError::InvalidMedium(format!(
                "relative permittivity {rel_permittivity}"
            )));
        }
        if !(loss_tangent.is_finite() && loss_tangent >= 0.0) {
            return Err(OracleError::InvalidMedium(format!(
                "loss tangent {loss_tangent}"
            )));
        }
        Ok(Self {
            cutoff_wavenumber,
            rel_permittivity,
            loss_tangent,
        })
    }

    /// TE10 mode of a guide of broad-wall width `a` metres.
    pub fn te10(width: f64, rel_permittivity: f64, loss_tangent: f64) -> Result<Self, OracleError> {
        if !(width.is_finite() && width > 0.0) {
            return Err(OracleError::InvalidMedium(format!("guide width {width}")));
        }
        Self::new(PI / width, rel_permittivity, loss_tangent)
    }

    /// Plane wave (TEM) in the given dielectric.
    pub fn tem(rel_permittivity: f64, loss_tangent: f64) -> Result<Self, OracleError> {
        Self::new(0.0, rel_permittivity, loss_tangent)
    }

    /// Cutoff frequency of the lossless filling, Hz.
    pub fn cutoff_frequency(&self) -> f64 {
        self.cutoff_wavenumber * SPEED_OF_LIGHT / (2.0 * PI * self.rel_permittivity.sqrt())
    }

    pub fn is_lossless(&self) -> bool {
        self.loss_tangent == 0.0
    }
}

fn check_frequency(freq: f64) -> Result<(), OracleError> {
    if freq.is_finite() && freq > 0.0 {
        Ok(())
    } else {
        Err(OracleError::InvalidFrequency(freq))
    }
}

/// `k_z = sqrt(eps_c k0^2 - kc^2)` on the passive branch (`Re >= 0`, `Im <= 0`).
pub fn te10_kz(freq: f64, spec: &WaveguideSpec) -> Result<Complex64, OracleError> {
    check_frequency(freq)?;
    let k0 = 2.0 * PI * freq / SPEED_OF_LIGHT;
    let kc2 = spec.cutoff_wavenumber * spec.cutoff_wavenumber;
    let er_k02 = spec.rel_permittivity * k0 * k0;
    if spec.is_lossless() {
        let w = er_k02 - kc2;
        return Ok(if w >= 0.0 {
            Complex64::new(w.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, -(-w).sqrt())
        });
    }
    let w = Complex64::new(er_k02 - kc2, -er_k02 * spec.loss_tangent);
    let mut kz = w.sqrt();
    if kz.re < 0.0 {
        kz = -kz;
    }
    Ok(kz)
}

/// TE wave impedance `omega mu0 / k_z` (the TEM impedance when `kc = 0`).
pub fn wave_impedance(freq: f64, spec: &WaveguideSpec) -> Result<Complex64, OracleError> {
    let kz = te10_kz(freq, spec)?;
    impedance_from_kz(freq, kz)
}

fn impedance_from_kz(freq: f64, kz: Complex64) -> Result<Complex64, OracleError> {
    if kz == Complex64::new(0.0, 0.0) {
        return Err(OracleError::ZeroImpedance(freq));
    }
    Ok(Complex64::new(2.0 * PI * freq * MU_0, 0.0) / kz)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    /// Metres.
    pub length: f64,
    pub medium: WaveguideSpec,
}

impl LayerSpec {
    pub fn new(length: f64, medium: WaveguideSpec) -> Result<Self, OracleError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(OracleError::InvalidLength(length));
        }
        Ok(Self { length, medium })
    }
}

/// Zero-length shunt admittance, normalised to the wave impedance of the
/// cell's first layer at each frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShuntElementSpec {
    pub normalized_admittance: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CellElement {
    Layer(LayerSpec),
    Shunt(ShuntElementSpec),
}

impl CellElement {
    pub fn length(&self) -> f64 {
        match self {
            CellElement::Layer(l) => l.length,
            CellElement::Shunt(_) => 0.0,
        }
    }
}

/// One period of a cascaded structure, elements in +z order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCellSpec {
    elements: Vec<CellElement>,
    period: f64,
}

impl UnitCellSpec {
    pub fn new(elements: Vec<CellElement>) -> Result<Self, OracleError> {
        let mut cutoff = None;
        for e in &elements {
            match e {
                CellElement::Layer(l) => {
                    LayerSpec::new(l.length, l.medium)?;
                    let kc = l.medium.cutoff_wavenumber;
                    match cutoff {
                        None => cutoff = Some(kc),
                        Some(first) if first != kc => {
                            return Err(OracleError::MismatchedCutoff(first, kc))
                        }
                        Some(_) => {}
                    }
                }
                CellElement::Shunt(s) => {
                    if !s.normalized_admittance.is_finite() {
                        return Err(OracleError::NonFiniteAdmittance);
                    }
                }
            }
        }
        if cutoff.is_none() {
            return Err(OracleError::NoLayers);
        }
        let period = elements.iter().map(CellElement::length).sum();
        Ok(Self { elements, period })
    }

    /// A single homogeneous layer; any length is a valid period.
    pub fn uniform(medium: WaveguideSpec, length: f64) -> Result<Self, OracleError> {
        Self::new(vec![CellElement::Layer(LayerSpec::new(length, medium)?)])
    }

    pub fn elements(&self) -> &[CellElement] {
        &self.elements
    }

    /// Sum of layer lengths, metres.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Medium whose wave impedance normalises the shunt admittances.
    pub fn reference_medium(&self) -> WaveguideSpec {
        self.elements
            .iter()
            .find_map(|e| match e {
                CellElement::Layer(l) => Some(l.medium),
                CellElement::Shunt(_) => None,
            })
            .expect("validated cell has a layer")
    }

    pub fn is_lossless(&self) -> bool {
        self.elements.iter().all(|e| match e {
            CellElement::Layer(l) => l.medium.is_lossless(),
            CellElement::Shunt(s) => s.normalized_admittance.re == 0.0,
        })
    }
}

/// Voltage/current transfer matrix `[V1; I1] = [[a, b], [c, d]] [V2; I2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    /// Uniform line section of electrical length `kz * length`.
    pub fn line(kz: Complex64, impedance: Complex64, length: f64) -> Self {
        let theta = kz * length;
        let (cos, sin) = (theta.cos(), theta.sin());
        let j = Complex64::i();
        Self {
            a: cos,
            b: j * impedance * sin,
            c: j * sin / impedance,
            d: cos,
        }
    }

    pub fn shunt(admittance: Complex64) -> Self {
        Self {
            c: admittance,
            ..Self::identity()
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `(A + D) / 2`.
    pub fn half_trace(&self) -> Complex64 {
        (self.a + self.d) * 0.5
    }

    pub fn apply(&self, v: Complex64, i: Complex64) -> (Complex64, Complex64) {
        (self.a * v + self.b * i, self.c * v + self.d * i)
    }

    pub fn max_abs_diff(&self, other: &Abcd) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }
}

impl Mul for Abcd {
    type Output = Abcd;

    /// Cascade: `self` followed by `rhs`.
    fn mul(self, rhs: Abcd) -> Abcd {
        Abcd {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

/// ABCD matrix of one element. Shunt admittances are denormalised by
/// `reference_impedance`.
pub fn element_abcd(
    element: &CellElement,
    freq: f64,
    reference_impedance: Complex64,
) -> Result<Abcd, OracleError> {
    check_frequency(freq)?;
    match element {
        CellElement::Layer(layer) => {
            let kz = te10_kz(freq, &layer.medium)?;
            let z = impedance_from_kz(freq, kz)?;
            Ok(Abcd::line(kz, z, layer.length))
        }
        CellElement::Shunt(shunt) => Ok(Abcd::shunt(
            shunt.normalized_admittance / reference_impedance,
        )),
    }
}

/// Ordered product of the cell's element matrices.
pub fn cell_abcd(cell: &UnitCellSpec, freq: f64) -> Result<Abcd, OracleError> {
    let z_ref = wave_impedance(freq, &cell.reference_medium())?;
    cell.elements().iter().try_fold(Abcd::identity(), |acc, e| {
        Ok(acc * element_abcd(e, freq, z_ref)?)
    })
}

/// Bloch eigenvalue with the orientation rule that picked it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSolution {
    /// Principal branch: `beta * p` in `(-pi, pi]`.
    pub kz: Complex64,
    pub lambda_forward: Complex64,
    pub rule: OrientationRule,
}

/// Solves `lambda^2 - (A + D) lambda + 1 = 0` for the forward Bloch wave.
///
/// `h^2 - 1` is evaluated as `((A - D)/2)^2 + B C`, which equals it for a unit
/// determinant and avoids the cancellation of `h^2 - 1` when `h` is near
/// `±1`.
pub fn bloch_solution(m: &Abcd, period: f64, tie_eps: f64) -> Result<BlochSolution, OracleError> {
    if !(period.is_finite() && period > 0.0) {
        return Err(OracleError::InvalidLength(period));
    }
    let h = m.half_trace();
    let half_diff = (m.a - m.d) * 0.5;
    let root = (half_diff * half_diff + m.b * m.c).sqrt();
    let (big, small) = {
        let plus = h + root;
        let minus = h - root;
        if plus.norm() >= minus.norm() {
            (plus, minus)
        } else {
            (minus, plus)
        }
    };

    let (lambda, rule) = if big.norm().ln() > tie_eps {
        (big, OrientationRule::Magnitude)
    } else {
        let phase = big.arg();
        if phase.abs() <= tie_eps || PI - phase.abs() <= tie_eps {
            return Err(OracleError::DegenerateCell);
        }
        let forward = if phase > 0.0 { big } else { small };
        (forward, OrientationRule::PhaseSign)
    };

    let beta = lambda.arg() / period;
    let alpha = lambda.norm().ln() / period;
    Ok(BlochSolution {
        kz: Complex64::new(beta, -alpha),
        lambda_forward: lambda,
        rule,
    })
}

/// Forward Bloch `k_z` of a unit cell matrix, principal branch.
pub fn bloch_kz(m: &Abcd, period: f64) -> Result<Complex64, OracleError> {
    bloch_solution(m, period, 1e-9).map(|s| s.kz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const A: f64 = 0.008;

    fn vacuum() -> WaveguideSpec {
        WaveguideSpec::te10(A, 1.0, 0.0).unwrap()
    }

    fn ab_cell(tand: f64) -> UnitCellSpec {
        let b = WaveguideSpec::te10(A, 2.2, tand).unwrap();
        UnitCellSpec::new(vec![
            CellElement::Layer(LayerSpec::new(0.003, vacuum()).unwrap()),
            CellElement::Layer(LayerSpec::new(0.003, b).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn vacuum_cutoff_frequency() {
        // c / (2a)
        assert_relative_eq!(
            vacuum().cutoff_frequency(),
            18.737_028_625e9,
            max_relative = 1e-9
        );
        let kz = te10_kz(vacuum().cutoff_frequency(), &vacuum()).unwrap();
        assert!(kz.norm() < 1e-5, "{kz}");
    }

    #[test]
    fn vacuum_25ghz_propagates() {
        let kz = te10_kz(25e9, &vacuum()).unwrap();
        let k0 = 2.0 * PI * 25e9 / SPEED_OF_LIGHT;
        let expected = (k0 * k0 - (PI / A).powi(2)).sqrt();
        assert_relative_eq!(kz.re, expected, max_relative = 1e-14);
        assert_relative_eq!(kz.re, 346.9, max_relative = 1e-3);
        assert_eq!(kz.im, 0.0);
    }

    #[test]
    fn vacuum_10ghz_is_evanescent() {
        let kz = te10_kz(10e9, &vacuum()).unwrap();
        let k0 = 2.0 * PI * 10e9 / SPEED_OF_LIGHT;
        assert_eq!(kz.re, 0.0);
        assert_relative_eq!(
            -kz.im,
            ((PI / A).powi(2) - k0 * k0).sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(-kz.im, 332.0, max_relative = 2e-3);
    }

    #[test]
    fn tem_limit_is_plane_wave() {
        let spec = WaveguideSpec::tem(2.2, 0.0).unwrap();
        let kz = te10_kz(10e9, &spec).unwrap();
        assert_relative_eq!(
            kz.re,
            2.2f64.sqrt() * 2.0 * PI * 10e9 / SPEED_OF_LIGHT,
            max_relative = 1e-15
        );
    }

    #[test]
    fn lossy_branch_is_passive() {
        let spec = WaveguideSpec::te10(A, 2.2, 0.005).unwrap();
        for f in [5e9, 12e9, 12.63e9, 13e9, 30e9] {
            let kz = te10_kz(f, &spec).unwrap();
            assert!(kz.re > 0.0 && kz.im < 0.0, "{f}: {kz}");
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(te10_kz(0.0, &vacuum()).is_err());
        assert!(WaveguideSpec::new(-1.0, 1.0, 0.0).is_err());
        assert!(WaveguideSpec::new(1.0, 0.0, 0.0).is_err());
        assert!(WaveguideSpec::new(1.0, 1.0, -0.1).is_err());
        assert!(LayerSpec::new(0.0, vacuum()).is_err());
        assert_eq!(UnitCellSpec::new(vec![]), Err(OracleError::NoLayers));
        let other = WaveguideSpec::te10(0.01, 1.0, 0.0).unwrap();
        assert!(matches!(
            UnitCellSpec::new(vec![
                CellElement::Layer(LayerSpec::new(0.001, vacuum()).unwrap()),
                CellElement::Layer(LayerSpec::new(0.001, other).unwrap()),
            ]),
            Err(OracleError::MismatchedCutoff(..))
        ));
    }

    #[test]
    fn short_layer_tends_to_identity() {
        let layer = CellElement::Layer(LayerSpec::new(1e-12, vacuum()).unwrap());
        let m = element_abcd(&layer, 25e9, Complex64::new(1.0, 0.0)).unwrap();
        assert!(m.max_abs_diff(&Abcd::identity()) < 1e-6);
    }

    #[test]
    fn zero_shunt_is_identity() {
        let shunt = CellElement::Shunt(ShuntElementSpec {
            normalized_admittance: Complex64::new(0.0, 0.0),
        });
        let m = element_abcd(&shunt, 25e9, Complex64::new(500.0, 0.0)).unwrap();
        assert_eq!(m, Abcd::identity());
    }

    #[test]
    fn vacuum_layer_diagonal_is_cos_beta_l() {
        let layer = CellElement::Layer(LayerSpec::new(0.003, vacuum()).unwrap());
        let m = element_abcd(&layer, 25e9, Complex64::new(1.0, 0.0)).unwrap();
        let beta = te10_kz(25e9, &vacuum()).unwrap().re;
        assert_relative_eq!(beta * 0.003, 1.0407, max_relative = 1e-4);
        assert_relative_eq!(m.a.re, (beta * 0.003).cos(), max_relative = 1e-14);
        assert_eq!(m.a, m.d);
        assert!((m.determinant() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn layer_at_cutoff_has_singular_impedance() {
        // kc chosen so that k0 = kc exactly at 1 GHz.
        let kc = 2.0 * PI * 1e9 / SPEED_OF_LIGHT;
        let spec = WaveguideSpec::new(kc, 1.0, 0.0).unwrap();
        assert_eq!(te10_kz(1e9, &spec).unwrap(), Complex64::new(0.0, 0.0));
        let layer = CellElement::Layer(LayerSpec::new(0.003, spec).unwrap());
        assert_eq!(
            element_abcd(&layer, 1e9, Complex64::new(1.0, 0.0)),
            Err(OracleError::ZeroImpedance(1e9))
        );
    }

    #[test]
    fn single_layer_cell_equals_element() {
        let cell = UnitCellSpec::uniform(vacuum(), 0.006).unwrap();
        let layer = cell.elements()[0];
        let z = wave_impedance(25e9, &vacuum()).unwrap();
        assert_eq!(
            cell_abcd(&cell, 25e9).unwrap(),
            element_abcd(&layer, 25e9, z).unwrap()
        );
    }

    #[test]
    fn halves_compose_to_whole() {
        let whole = UnitCellSpec::uniform(vacuum(), 0.006).unwrap();
        let half = LayerSpec::new(0.003, vacuum()).unwrap();
        let halves =
            UnitCellSpec::new(vec![CellElement::Layer(half), CellElement::Layer(half)]).unwrap();
        for f in [10e9, 25e9] {
            let a = cell_abcd(&whole, f).unwrap();
            let b = cell_abcd(&halves, f).unwrap();
            let scale = a.b.norm().max(1.0);
            assert!(a.max_abs_diff(&b) <= 1e-12 * scale, "{f}");
        }
    }

    #[test]
    fn ab_cell_is_reciprocal() {
        let m = cell_abcd(&ab_cell(0.0), 16e9).unwrap();
        assert!((m.determinant() - 1.0).norm() <= 1e-10);
        let m = cell_abcd(&ab_cell(0.05), 16e9).unwrap();
        assert!((m.determinant() - 1.0).norm() <= 1e-10);
    }

    #[test]
    fn bloch_on_uniform_matches_closed_form() {
        for p in [0.002, 0.004, 0.006, 0.008] {
            let cell = UnitCellSpec::uniform(vacuum(), p).unwrap();
            let kz = bloch_kz(&cell_abcd(&cell, 25e9).unwrap(), p).unwrap();
            let exact = te10_kz(25e9, &vacuum()).unwrap();
            assert!(
                (kz - exact).norm() <= 1e-10 * exact.norm(),
                "p={p}: {kz} vs {exact}"
            );
        }
    }

    #[test]
    fn ab_first_passband_edge_near_14_7_ghz() {
        let cell = ab_cell(0.0);
        let mut edge = None;
        let mut f = 10e9;
        while f < 20e9 {
            let h = cell_abcd(&cell, f).unwrap().half_trace();
            if h.re.abs() <= 1.0 {
                edge = Some(f);
                break;
            }
            f += 1e7;
        }
        let edge = edge.expect("passband found");
        assert!((edge - 14.7e9).abs() <= 0.3e9, "{edge}");
    }

    #[test]
    fn ab_stopband_phase_is_pinned() {
        let cell = ab_cell(0.0);
        for f in [23e9, 25e9, 27e9] {
            let kz = bloch_kz(&cell_abcd(&cell, f).unwrap(), cell.period()).unwrap();
            let bp = kz.re * cell.period();
            assert!((bp.abs() - PI).abs() < 1e-12, "{f}: beta p = {bp}");
            assert!(-kz.im > 0.0);
        }
        // Below the first passband the phase is pinned at zero.
        let kz = bloch_kz(&cell_abcd(&cell, 12e9).unwrap(), cell.period()).unwrap();
        assert_eq!(kz.re, 0.0);
        assert!(-kz.im > 0.0);
    }

    #[test]
    fn double_root_cell_is_degenerate() {
        let m = Abcd {
            a: Complex64::new(-1.0, 0.0),
            d: Complex64::new(-1.0, 0.0),
            ..Abcd::identity()
        };
        assert_eq!(bloch_kz(&m, 0.006), Err(OracleError::DegenerateCell));
    }
}
