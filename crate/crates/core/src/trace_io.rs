//! Trace files, column-mapped import of simulator exports, and triplet
//! extraction.
//!
//! Canonical format (UTF-8):
//!
//! ```text
//! # format_version=1
//! # frequency_hz=2.5000000000000000e10
//! # period_m=6.0000000000000001e-3
//! # component=Ey
//! # x_m=0.0000000000000000e0
//! # y_m=0.0000000000000000e0
//! # z_start_m=0.0000000000000000e0
//! # dz_m=5.0000000000000001e-4
//! # count=3
//! z_m,re,im
//! 0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0
//! ...
//! ```
//!
//! Numbers carry 17 significant digits so every `f64` round-trips exactly.
//! A trace whose period is not a whole number of grid steps is still
//! written, with a `# warning=...` line after the header keys.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use thiserror::Error;

use crate::extract::SampleTriplet;
use crate::trace::{stride_for, Component, FieldTrace, TraceError};

pub const FORMAT_VERSION: u32 = 1;

/// Relative tolerance on grid spacing uniformity.
pub const GRID_UNIFORMITY_TOL: f64 = 1e-9;

const HEADER_KEYS: [&str; 9] = [
    "format_version",
    "frequency_hz",
    "period_m",
    "component",
    "x_m",
    "y_m",
    "z_start_m",
    "dz_m",
    "count",
];

const COLUMN_LINE: &str = "z_m,re,im";

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("i/o error: {0}")]
    Stream(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("header: {0}")]
    Header(String),
    #[error("line {line}: grid is not uniform ({message})")]
    Grid { line: usize, message: String },
    #[error("line {line}: {message}")]
    Mapping { line: usize, message: String },
    #[error("invalid column mapping: {0}")]
    InvalidMapping(String),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl TraceIoError {
    fn with_path(self, path: &Path) -> Self {
        match self {
            TraceIoError::Stream(source) => TraceIoError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        }
    }
}

/// Parsed header block of a canonical trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFileHeader {
    pub format_version: u32,
    pub frequency_hz: f64,
    pub period_m: f64,
    pub component: Component,
    pub x_m: f64,
    pub y_m: f64,
    pub z_start_m: f64,
    pub dz_m: f64,
    pub count: usize,
    pub warnings: Vec<String>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the canonical text form of `trace`.
pub fn write_trace<W: Write>(trace: &FieldTrace, mut out: W) -> Result<(), TraceIoError> {
    trace.validate()?;
    if trace.len() < 3 {
        return Err(TraceIoError::Header(format!(
            "count must be at least 3, trace has {}",
            trace.len()
        )));
    }
    let (x, y) = trace.transverse_position;
    writeln!(out, "# format_version={FORMAT_VERSION}")?;
    writeln!(out, "# frequency_hz={}", fmt_f64(trace.frequency))?;
    writeln!(out, "# period_m={}", fmt_f64(trace.period))?;
    writeln!(out, "# component={}", trace.component)?;
    writeln!(out, "# x_m={}", fmt_f64(x))?;
    writeln!(out, "# y_m={}", fmt_f64(y))?;
    writeln!(out, "# z_start_m={}", fmt_f64(trace.z_start))?;
    writeln!(out, "# dz_m={}", fmt_f64(trace.dz))?;
    writeln!(out, "# count={}", trace.len())?;
    if let Err(e) = trace.period_stride() {
        writeln!(out, "# warning={e}")?;
    }
    writeln!(out, "{COLUMN_LINE}")?;
    for (n, v) in trace.values.iter().enumerate() {
        writeln!(
            out,
            "{},{},{}",
            fmt_f64(trace.z_at(n)),
            fmt_f64(v.re),
            fmt_f64(v.im)
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace_file(trace: &FieldTrace, path: &Path) -> Result<(), TraceIoError> {
    let file = File::create(path).map_err(|source| TraceIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_trace(trace, BufWriter::new(file)).map_err(|e| e.with_path(path))
}

fn parse_number<T: std::str::FromStr>(
    text: &str,
    line: usize,
    what: &str,
) -> Result<T, TraceIoError> {
    text.trim().parse().map_err(|_| TraceIoError::Parse {
        line,
        message: format!("cannot parse {what} from {text:?}"),
    })
}

fn parse_header(lines: &[(usize, String)]) -> Result<TraceFileHeader, TraceIoError> {
    let mut values: [Option<(usize, String)>; 9] = Default::default();
    let mut warnings = Vec::new();
    for (line, text) in lines {
        let body = text.trim_start_matches('#').trim();
        let (key, value) = body.split_once('=').ok_or_else(|| TraceIoError::Parse {
            line: *line,
            message: format!("header line is not key=value: {text:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key == "warning" {
            warnings.push(value.to_string());
            continue;
        }
        let slot = HEADER_KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| TraceIoError::Header(format!("unknown key {key:?} on line {line}")))?;
        if values[slot].is_some() {
            return Err(TraceIoError::Header(format!(
                "duplicate key {key:?} on line {line}"
            )));
        }
        values[slot] = Some((*line, value.to_string()));
    }
    let get = |i: usize| {
        values[i]
            .clone()
            .ok_or_else(|| TraceIoError::Header(format!("missing key {:?}", HEADER_KEYS[i])))
    };
    let num = |i: usize| -> Result<f64, TraceIoError> {
        let (line, v) = get(i)?;
        parse_number(&v, line, HEADER_KEYS[i])
    };
    let (vline, version) = get(0)?;
    let format_version: u32 = parse_number(&version, vline, "format_version")?;
    if format_version != FORMAT_VERSION {
        return Err(TraceIoError::Header(format!(
            "unsupported format_version {format_version}"
        )));
    }
    let (cline, count) = get(8)?;
    let count: usize = parse_number(&count, cline, "count")?;
    if count < 3 {
        return Err(TraceIoError::Header(format!(
            "count must be at least 3, got {count}"
        )));
    }
    let component: Component = get(3)?.1.parse().expect("infallible");
    Ok(TraceFileHeader {
        format_version,
        frequency_hz: num(1)?,
        period_m: num(2)?,
        component,
        x_m: num(4)?,
        y_m: num(5)?,
        z_start_m: num(6)?,
        dz_m: num(7)?,
        count,
        warnings,
    })
}

fn check_spacing(z: &[(usize, f64)], dz: f64) -> Result<(), TraceIoError> {
    for w in z.windows(2) {
        let (line, z1) = w[1];
        let step = z1 - w[0].1;
        if !((step - dz).abs() <= GRID_UNIFORMITY_TOL * dz) {
            return Err(TraceIoError::Grid {
                line,
                message: format!("step {step:e} m, expected {dz:e} m"),
            });
        }
    }
    Ok(())
}

/// Reads a canonical trace file, checking every invariant.
pub fn read_trace<R: Read>(source: R) -> Result<FieldTrace, TraceIoError> {
    let reader = BufReader::new(source);
    let mut header_lines = Vec::new();
    let mut rows: Vec<(usize, f64, Complex64)> = Vec::new();
    let mut seen_columns = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if !seen_columns {
            if text.starts_with('#') {
                header_lines.push((line_no, text.to_string()));
                continue;
            }
            if text != COLUMN_LINE {
                return Err(TraceIoError::Parse {
                    line: line_no,
                    message: format!("expected column line {COLUMN_LINE:?}, found {text:?}"),
                });
            }
            seen_columns = true;
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 3 {
            return Err(TraceIoError::Parse {
                line: line_no,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let z: f64 = parse_number(fields[0], line_no, "z_m")?;
        let re: f64 = parse_number(fields[1], line_no, "re")?;
        let im: f64 = parse_number(fields[2], line_no, "im")?;
        rows.push((line_no, z, Complex64::new(re, im)));
    }
    let header = parse_header(&header_lines)?;
    if !seen_columns {
        return Err(TraceIoError::Header(
            "missing column line and data section".into(),
        ));
    }
    if rows.len() != header.count {
        return Err(TraceIoError::Header(format!(
            "count={} but data section has {} rows",
            header.count,
            rows.len()
        )));
    }
    let (first_line, z0, _) = rows[0];
    if !((z0 - header.z_start_m).abs() <= GRID_UNIFORMITY_TOL * header.dz_m) {
        return Err(TraceIoError::Grid {
            line: first_line,
            message: format!(
                "first z {z0:e} m differs from z_start_m {:e} m",
                header.z_start_m
            ),
        });
    }
    let z: Vec<(usize, f64)> = rows.iter().map(|&(l, z, _)| (l, z)).collect();
    check_spacing(&z, header.dz_m)?;
    let values = rows.into_iter().map(|(_, _, v)| v).collect();
    let trace = FieldTrace::new(
        header.frequency_hz,
        header.component,
        header.z_start_m,
        header.dz_m,
        values,
        header.period_m,
    )?
    .with_position(header.x_m, header.y_m);
    Ok(trace)
}

pub fn read_trace_file(path: &Path) -> Result<FieldTrace, TraceIoError> {
    let file = File::open(path).map_err(|source| TraceIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_trace(file).map_err(|e| e.with_path(path))
}

/// Where the complex field lives in a delimited export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldColumns {
    ReIm { re: usize, im: usize },
    MagnitudePhaseDeg { magnitude: usize, phase_deg: usize },
}

/// Column layout and unit scaling of an external export. Indices are
/// zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMapping {
    pub delimiter: u8,
    pub z_column: usize,
    pub field: FieldColumns,
    /// Multiplier taking the file's z unit to metres.
    pub z_scale: f64,
    pub field_scale: f64,
    /// Leading lines to ignore (title rows, column names).
    pub skip_rows: usize,
    pub comment: Option<u8>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            delimiter: b',',
            z_column: 0,
            field: FieldColumns::ReIm { re: 1, im: 2 },
            z_scale: 1.0,
            field_scale: 1.0,
            skip_rows: 0,
            comment: Some(b'#'),
        }
    }
}

impl ColumnMapping {
    pub fn validate(&self) -> Result<(), TraceIoError> {
        let cols = match self.field {
            FieldColumns::ReIm { re, im } => [self.z_column, re, im],
            FieldColumns::MagnitudePhaseDeg {
                magnitude,
                phase_deg,
            } => [self.z_column, magnitude, phase_deg],
        };
        if cols[0] == cols[1] || cols[0] == cols[2] || cols[1] == cols[2] {
            return Err(TraceIoError::InvalidMapping(format!(
                "columns must be distinct, got {cols:?}"
            )));
        }
        for (name, s) in [("z_scale", self.z_scale), ("field_scale", self.field_scale)] {
            if !(s.is_finite() && s > 0.0) {
                return Err(TraceIoError::InvalidMapping(format!(
                    "{name} must be > 0, got {s}"
                )));
            }
        }
        Ok(())
    }

    /// Parses a `key=value` mapping file. Keys: `delimiter` (a single
    /// character, or `tab`/`space`), `z_column`, `re_column`, `im_column`,
    /// `magnitude_column`, `phase_deg_column`, `z_scale`, `field_scale`,
    /// `skip_rows`, `comment` (a single character or `none`). Blank lines and
    /// lines starting with `#` are ignored.
    pub fn from_config_str(text: &str) -> Result<Self, TraceIoError> {
        let mut mapping = ColumnMapping::default();
        let (mut re, mut im, mut mag, mut phase) = (None, None, None, None);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| TraceIoError::Parse {
                line,
                message: format!("expected key=value, found {body:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let single_byte = |v: &str| -> Result<u8, TraceIoError> {
                match v {
                    "tab" | "\\t" => Ok(b'\t'),
                    "space" => Ok(b' '),
                    _ if v.len() == 1 => Ok(v.as_bytes()[0]),
                    _ => Err(TraceIoError::Parse {
                        line,
                        message: format!("{key} must be one character, got {v:?}"),
                    }),
                }
            };
            match key {
                "delimiter" => mapping.delimiter = single_byte(value)?,
                "comment" => {
                    mapping.comment = if value == "none" {
                        None
                    } else {
                        Some(single_byte(value)?)
                    }
                }
                "z_column" => mapping.z_column = parse_number(value, line, key)?,
                "re_column" => re = Some(parse_number(value, line, key)?),
                "im_column" => im = Some(parse_number(value, line, key)?),
                "magnitude_column" => mag = Some(parse_number(value, line, key)?),
                "phase_deg_column" => phase = Some(parse_number(value, line, key)?),
                "z_scale" => mapping.z_scale = parse_number(value, line, key)?,
                "field_scale" => mapping.field_scale = parse_number(value, line, key)?,
                "skip_rows" => mapping.skip_rows = parse_number(value, line, key)?,
                _ => {
                    return Err(TraceIoError::Parse {
                        line,
                        message: format!("unknown mapping key {key:?}"),
                    })
                }
            }
        }
        mapping.field = match (re, im, mag, phase) {
            (Some(re), Some(im), None, None) => FieldColumns::ReIm { re, im },
            (None, None, Some(magnitude), Some(phase_deg)) => FieldColumns::MagnitudePhaseDeg {
                magnitude,
                phase_deg,
            },
            (None, None, None, None) => mapping.field,
            _ => {
                return Err(TraceIoError::InvalidMapping(
                    "give either re_column+im_column or magnitude_column+phase_deg_column".into(),
                ))
            }
        };
        mapping.validate()?;
        Ok(mapping)
    }
}

/// Metadata an export does not carry and the caller must supply.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportMetadata {
    pub frequency_hz: f64,
    pub period_m: f64,
    pub component: Component,
    pub x_m: f64,
    pub y_m: f64,
}

/// Builds a trace from a delimited export. Rows are sorted by z; duplicate
/// or non-uniform z values are errors.
pub fn import_columns<R: Read>(
    source: R,
    mapping: &ColumnMapping,
    metadata: &ImportMetadata,
) -> Result<FieldTrace, TraceIoError> {
    mapping.validate()?;
    let mut text = String::new();
    BufReader::new(source).read_to_string(&mut text)?;
    // Keep file line numbers: csv positions count from the first kept line.
    let skipped: usize = mapping.skip_rows;
    let body: String = text.split_inclusive('\n').skip(skipped).collect();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(mapping.comment)
        .from_reader(body.as_bytes());

    let needed = match mapping.field {
        FieldColumns::ReIm { re, im } => mapping.z_column.max(re).max(im),
        FieldColumns::MagnitudePhaseDeg {
            magnitude,
            phase_deg,
        } => mapping.z_column.max(magnitude).max(phase_deg),
    };
    let mut rows: Vec<(usize, f64, Complex64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| TraceIoError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize + skipped),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize) + skipped;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() <= needed {
            return Err(TraceIoError::Mapping {
                line,
                message: format!(
                    "row has {} columns, mapping needs column {needed}",
                    record.len()
                ),
            });
        }
        let col = |i: usize, what: &str| parse_number::<f64>(&record[i], line, what);
        let z = col(mapping.z_column, "z")? * mapping.z_scale;
        let value = match mapping.field {
            FieldColumns::ReIm { re, im } => Complex64::new(col(re, "re")?, col(im, "im")?),
            FieldColumns::MagnitudePhaseDeg {
                magnitude,
                phase_deg,
            } => Complex64::from_polar(
                col(magnitude, "magnitude")?,
                col(phase_deg, "phase")?.to_radians(),
            ),
        } * mapping.field_scale;
        rows.push((line, z, value));
    }
    if rows.len() < 3 {
        return Err(TraceIoError::Header(format!(
            "import needs at least 3 data rows, found {}",
            rows.len()
        )));
    }
    rows.sort_by(|a, b| a.1.total_cmp(&b.1));
    for w in rows.windows(2) {
        if w[0].1 == w[1].1 {
            return Err(TraceIoError::Grid {
                line: w[1].0,
                message: format!("duplicate z {:e} m (also on line {})", w[1].1, w[0].0),
            });
        }
    }
    let z_start = rows[0].1;
    let dz = (rows[rows.len() - 1].1 - z_start) / (rows.len() - 1) as f64;
    let z: Vec<(usize, f64)> = rows.iter().map(|&(l, z, _)| (l, z)).collect();
    check_spacing(&z, dz)?;
    let values = rows.into_iter().map(|(_, _, v)| v).collect();
    Ok(FieldTrace::new(
        metadata.frequency_hz,
        metadata.component.clone(),
        z_start,
        dz,
        values,
        metadata.period_m,
    )?
    .with_position(metadata.x_m, metadata.y_m))
}

/// A triplet centred on sample `index`, with the sample one period beyond
/// the triplet when the trace has it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexedTriplet {
    pub index: usize,
    pub triplet: SampleTriplet,
    /// `E(z + 2p)`, used for the multimode residual.
    pub beyond: Option<Complex64>,
}

impl IndexedTriplet {
    pub fn quadruple(&self) -> Option<[Complex64; 4]> {
        let t = &self.triplet;
        self.beyond.map(|b| [t.e_minus, t.e_center, t.e_plus, b])
    }
}

/// Every period-spaced triplet of a trace. With `stride_override` the
/// spacing is that many grid steps instead of the trace period; this is only
/// meaningful for uniform structures, where any length is a period.
pub fn triplets_from_trace(
    trace: &FieldTrace,
    stride_override: Option<usize>,
) -> Result<Vec<IndexedTriplet>, TraceIoError> {
    let (k, period) = match stride_override {
        Some(0) => {
            return Err(TraceIoError::InvalidMapping(
                "stride override must be at least 1".into(),
            ))
        }
        Some(k) => (k, k as f64 * trace.dz),
        None => (stride_for(trace.period, trace.dz)?, trace.period),
    };
    let v = &trace.values;
    if v.len() < 2 * k + 1 {
        return Ok(Vec::new());
    }
    (k..v.len() - k)
        .map(|n| {
            let triplet = SampleTriplet::new(v[n - k], v[n], v[n + k], period)
                .map_err(|e| TraceIoError::Header(e.to_string()))?;
            Ok(IndexedTriplet {
                index: n,
                triplet,
                beyond: v.get(n + 2 * k).copied(),
            })
        })
        .collect()
}
