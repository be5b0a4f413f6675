//! Strategies and invariant checks shared by the property suite and the
//! acceptance runner.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use fpps::extract::{estimate_propagation, solve_u_pair, ExtractConfig, SampleTriplet};
use fpps::oracles::{
    cell_abcd, CellElement, LayerSpec, ShuntElementSpec, UnitCellSpec, WaveguideSpec,
};
use fpps::synth::{synth_uniform_trace, Grid};
use fpps::trace::{Component, FieldTrace};
use fpps::trace_io::{read_trace, write_trace};

pub const GUIDE_WIDTH: f64 = 0.008;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn complex_in(radius: f64) -> impl Strategy<Value = Complex64> {
    (-radius..radius, -radius..radius).prop_map(|(re, im)| c(re, im))
}

pub fn polar(mag: std::ops::Range<f64>) -> impl Strategy<Value = Complex64> {
    (mag, -PI..PI).prop_map(|(m, phase)| Complex64::from_polar(m, phase))
}

/// Triplets with a centre sample well clear of a node.
pub fn triplet() -> impl Strategy<Value = SampleTriplet> {
    (
        complex_in(10.0),
        polar(0.1..10.0),
        complex_in(10.0),
        1e-4..1.0f64,
    )
        .prop_map(|(a, b, d, p)| SampleTriplet::new(a, b, d, p).unwrap())
}

/// Single-Floquet-mode field: forward and backward waves of one `k_z`.
#[derive(Debug, Clone, Copy)]
pub struct SingleMode {
    pub beta_p: f64,
    pub alpha_p: f64,
    pub forward: Complex64,
    pub backward: Complex64,
    pub period: f64,
}

impl SingleMode {
    pub fn kz(&self) -> Complex64 {
        c(self.beta_p, -self.alpha_p) / self.period
    }

    pub fn at(&self, z: f64) -> Complex64 {
        let j = Complex64::i();
        let kz = self.kz();
        self.forward * (-j * kz * z).exp() + self.backward * (j * kz * z).exp()
    }

    pub fn triplet_at(&self, z: f64) -> SampleTriplet {
        let p = self.period;
        SampleTriplet::new(self.at(z - p), self.at(z), self.at(z + p), p).unwrap()
    }
}

/// Passband and evanescent modes away from `beta p = 0, pi` and with a
/// backward wave no stronger than the forward one.
pub fn single_mode() -> impl Strategy<Value = SingleMode> {
    (
        prop_oneof![0.2..2.9f64, -2.9..-0.2f64],
        0.05..0.8f64,
        polar(0.5..2.0),
        0.0..0.9f64,
        -PI..PI,
        1e-3..0.05f64,
    )
        .prop_map(
            |(beta_p, alpha_p, forward, ratio, phase, period)| SingleMode {
                beta_p,
                alpha_p,
                forward,
                backward: forward * Complex64::from_polar(ratio, phase),
                period,
            },
        )
}

pub fn medium() -> impl Strategy<Value = WaveguideSpec> {
    (1.0..10.0f64, 0.0..0.1f64)
        .prop_map(|(er, tand)| WaveguideSpec::te10(GUIDE_WIDTH, er, tand).unwrap())
}

pub fn cell() -> impl Strategy<Value = UnitCellSpec> {
    let element = prop_oneof![
        3 => (medium(), 1e-4..5e-3f64)
            .prop_map(|(m, l)| CellElement::Layer(LayerSpec::new(l, m).unwrap())),
        1 => complex_in(3.0).prop_map(|y| CellElement::Shunt(ShuntElementSpec { normalized_admittance: y })),
    ];
    (
        medium(),
        1e-4..5e-3f64,
        prop::collection::vec(element, 0..5),
    )
        .prop_map(|(m, l, rest)| {
            let mut elements = vec![CellElement::Layer(LayerSpec::new(l, m).unwrap())];
            elements.extend(rest);
            UnitCellSpec::new(elements).unwrap()
        })
}

pub fn trace() -> impl Strategy<Value = FieldTrace> {
    (
        prop::collection::vec(complex_in(1e3), 3..200),
        1e8..1e11f64,
        -1.0..1.0f64,
        1e-5..1e-2f64,
        1usize..20,
    )
        .prop_map(|(values, freq, z0, dz, k)| {
            FieldTrace::new(freq, Component::Hz, z0, dz, values, k as f64 * dz)
                .unwrap()
                .with_position(1e-3, -2e-3)
        })
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn check_root_product(t: &SampleTriplet) -> Result<(), TestCaseError> {
    let config = ExtractConfig::default();
    let Ok(pair) = solve_u_pair(t, &config) else {
        // Orientation can be ambiguous on the unit circle; the product
        // check applies to the unordered roots regardless.
        let roots = fpps::extract::unordered_roots(t, &config).unwrap();
        prop_assert!((roots[0] * roots[1] - 1.0).norm() <= 1e-10);
        return Ok(());
    };
    prop_assert!(
        pair.product_error() <= 1e-10,
        "product error {}",
        pair.product_error()
    );
    Ok(())
}

pub fn check_quadratic_residual(t: &SampleTriplet) -> Result<(), TestCaseError> {
    let roots = fpps::extract::unordered_roots(t, &ExtractConfig::default()).unwrap();
    for u in roots {
        let r = t.quadratic_residual(u);
        prop_assert!(r <= 1e-12, "residual {r} for root {u}");
    }
    Ok(())
}

pub fn check_scale_invariance(t: &SampleTriplet, factor: Complex64) -> Result<(), TestCaseError> {
    let config = ExtractConfig::default();
    let a = fpps::extract::unordered_roots(t, &config).unwrap();
    let b = fpps::extract::unordered_roots(&t.scaled(factor), &config).unwrap();
    for (x, y) in a.iter().zip(&b) {
        prop_assert!(rel(*y, *x) <= 1e-12, "{x} vs {y}");
    }
    Ok(())
}

pub fn check_translation_invariance(
    mode: &SingleMode,
    z0: f64,
    shift: f64,
) -> Result<(), TestCaseError> {
    let config = ExtractConfig::default();
    let a = estimate_propagation(&mode.triplet_at(z0), 0, &config);
    let b = estimate_propagation(&mode.triplet_at(z0 + shift), 0, &config);
    let (a, b) = match (a, b) {
        (Ok(a), Ok(b)) => (a, b),
        // A centre landing on a standing-wave node is a reported error,
        // not a silent change of the answer.
        _ => return Ok(()),
    };
    let scale = mode.kz().norm();
    prop_assert!(
        (a.beta - b.beta).abs() <= 1e-9 * scale,
        "beta {} vs {}",
        a.beta,
        b.beta
    );
    prop_assert!(
        (a.alpha - b.alpha).abs() <= 1e-9 * scale,
        "alpha {} vs {}",
        a.alpha,
        b.alpha
    );
    let truth = mode.kz();
    prop_assert!(rel(a.kz(), truth) <= 1e-9, "{} vs {}", a.kz(), truth);
    Ok(())
}

pub fn check_abcd_determinant(cell: &UnitCellSpec, freq: f64) -> Result<(), TestCaseError> {
    match cell_abcd(cell, freq) {
        Ok(m) => {
            let det = m.determinant();
            prop_assert!((det - 1.0).norm() <= 1e-9, "det {det}");
        }
        Err(fpps::OracleError::ZeroImpedance(_)) => {}
        Err(e) => return Err(TestCaseError::fail(e.to_string())),
    }
    Ok(())
}

pub fn check_trace_round_trip(t: &FieldTrace) -> Result<(), TestCaseError> {
    let mut buf = Vec::new();
    write_trace(t, &mut buf).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let back = read_trace(&buf[..]).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(back.len(), t.len());
    prop_assert_eq!(&back.component, &t.component);
    prop_assert_eq!(back.frequency, t.frequency);
    prop_assert_eq!(back.dz, t.dz);
    for (a, b) in back.values.iter().zip(&t.values) {
        prop_assert!((a - b).norm() <= 1e-15 * b.norm(), "{a} vs {b}");
    }
    Ok(())
}

/// Uniform-guide trace used by several acceptance checks.
pub fn uniform_trace(
    kz: Complex64,
    backward: Complex64,
    period: f64,
    stride: usize,
    count: usize,
    freq: f64,
) -> FieldTrace {
    let grid = Grid {
        z_start: 0.0,
        dz: period / stride as f64,
        count,
    };
    synth_uniform_trace(kz, c(1.0, 0.0), backward, grid, period, freq).unwrap()
}

pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                stop
            } else {
                start + (stop - start) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// The dielectric-loaded cell: 3 mm vacuum then 3 mm of `er = 2.2`.
pub fn loaded_cell(tand: f64) -> UnitCellSpec {
    let vacuum = WaveguideSpec::te10(GUIDE_WIDTH, 1.0, 0.0).unwrap();
    let dielectric = WaveguideSpec::te10(GUIDE_WIDTH, 2.2, tand).unwrap();
    UnitCellSpec::new(vec![
        CellElement::Layer(LayerSpec::new(0.003, vacuum).unwrap()),
        CellElement::Layer(LayerSpec::new(0.003, dielectric).unwrap()),
    ])
    .unwrap()
}
