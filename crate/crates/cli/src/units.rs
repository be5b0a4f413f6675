//! Parsing of quantities with unit suffixes and of the unit-cell syntax.
//!
//! Everything is converted to SI here; the rest of the program never sees a
//! millimetre or a gigahertz.

use num_complex::Complex64;

use fpps::oracles::{CellElement, LayerSpec, ShuntElementSpec, UnitCellSpec, WaveguideSpec};

const LENGTH_UNITS: [(&str, f64); 5] = [
    ("mm", 1e-3),
    ("cm", 1e-2),
    ("um", 1e-6),
    ("nm", 1e-9),
    ("m", 1.0),
];

const FREQUENCY_UNITS: [(&str, f64); 4] = [("ghz", 1e9), ("mhz", 1e6), ("khz", 1e3), ("hz", 1.0)];

fn parse_scaled(text: &str, units: &[(&str, f64)], what: &str) -> Result<f64, String> {
    let raw = text.trim();
    let lower = raw.to_ascii_lowercase();
    let (number, scale) = units
        .iter()
        .find_map(|(suffix, scale)| lower.strip_suffix(suffix).map(|n| (n.trim(), *scale)))
        .unwrap_or((lower.as_str(), 1.0));
    let value: f64 = number
        .parse()
        .map_err(|_| format!("cannot read {what} {raw:?}"))?;
    let value = value * scale;
    if !value.is_finite() {
        return Err(format!("{what} {raw:?} is not finite"));
    }
    Ok(value)
}

/// `3mm`, `0.5cm`, `2e-3` (metres when no suffix).
pub fn parse_length(text: &str) -> Result<f64, String> {
    parse_scaled(text, &LENGTH_UNITS, "length")
}

/// `25GHz`, `150MHz`, `1e10` (hertz when no suffix).
pub fn parse_frequency(text: &str) -> Result<f64, String> {
    parse_scaled(text, &FREQUENCY_UNITS, "frequency")
}

pub fn positive_length(text: &str) -> Result<f64, String> {
    let v = parse_length(text)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("length {text:?} must be positive"))
    }
}

pub fn positive_frequency(text: &str) -> Result<f64, String> {
    let v = parse_frequency(text)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("frequency {text:?} must be positive"))
    }
}

/// `0.5`, `-2j`, `0.1+0.5j`, `1e-3-4e-2j`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s = text.trim();
    let bad = || format!("cannot read complex number {text:?}");
    let Some(body) = s.strip_suffix(['j', 'i']) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not the leading sign or an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Medium token: `vacuum`, `air`, `eps2.2` or `eps2.2@0.005`.
fn parse_medium(token: &str, cutoff_wavenumber: f64) -> Result<WaveguideSpec, String> {
    let (er, tand) = match token {
        "vacuum" | "air" => (1.0, 0.0),
        t if t.starts_with("eps") => {
            let rest = &t[3..];
            let (er, tand) = match rest.split_once('@') {
                Some((e, d)) => (e, Some(d)),
                None => (rest, None),
            };
            let er: f64 = er
                .parse()
                .map_err(|_| format!("bad permittivity in {token:?}"))?;
            let tand: f64 = match tand {
                Some(d) => d
                    .parse()
                    .map_err(|_| format!("bad loss tangent in {token:?}"))?,
                None => 0.0,
            };
            (er, tand)
        }
        _ => return Err(format!("unknown medium {token:?}; use vacuum, air or eps<er>[@<tand>]")),
    };
    WaveguideSpec::new(cutoff_wavenumber, er, tand).map_err(|e| e.to_string())
}

/// Comma-separated cell elements, e.g. `vacuum:3mm,eps2.2@0.005:3mm,shunt:-2j`.
/// Every layer shares `cutoff_wavenumber`; shunt admittances are relative to
/// the first layer's wave impedance.
pub fn parse_cell(text: &str, cutoff_wavenumber: f64) -> Result<UnitCellSpec, String> {
    let mut elements = Vec::new();
    for raw in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (head, value) = raw
            .split_once(':')
            .ok_or_else(|| format!("cell element {raw:?} needs the form <medium>:<length>"))?;
        if head == "shunt" {
            elements.push(CellElement::Shunt(ShuntElementSpec {
                normalized_admittance: parse_complex(value)?,
            }));
        } else {
            let medium = parse_medium(head, cutoff_wavenumber)?;
            let layer = LayerSpec::new(positive_length(value)?, medium).map_err(|e| e.to_string())?;
            elements.push(CellElement::Layer(layer));
        }
    }
    UnitCellSpec::new(elements).map_err(|e| e.to_string())
}
