use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use fpps::oracles::{te10_kz, UnitCellSpec, WaveguideSpec};
use fpps::sweep::{
    bloch_curve, compare_curves, detect_stopbands, extract_curve, read_curve_csv, te10_curve,
    write_curve_csv, AggregateConfig, AnchorPolicy, CompareOptions, CurveReport, DispersionCurve,
    StopbandConfig, StopbandMode, SweepConfig,
};
use fpps::synth::{
    add_noise, synth_periodic_trace, synth_uniform_trace, Grid, ModalQuantity, PeriodicOptions,
    Termination,
};
use fpps::trace::Component;
use fpps::trace_io::{
    import_columns, read_trace_file, write_trace_file, ColumnMapping, ImportMetadata,
};
use fpps::{ExtractConfig, FieldTrace};

use crate::args::*;
use crate::units::{parse_cell, parse_complex};
use crate::CliError;

/// Edge flag threshold shared by extracted and oracle curves.
const BAND_EDGE_SEPARATION: f64 = 1e-2;

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn io_error(path: &Path, source: io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl FrequencyArgs {
    pub fn frequencies(&self) -> Result<Vec<f64>, CliError> {
        match (self.f, self.f_start, self.f_stop, self.f_count) {
            (Some(f), None, None, None) => Ok(vec![f]),
            (None, Some(start), Some(stop), Some(count)) => {
                if !(start < stop) {
                    return Err(usage(format!("--f-start {start} Hz must be below --f-stop {stop} Hz")));
                }
                if count < 2 {
                    return Err(usage("--f-count must be at least 2"));
                }
                let step = (stop - start) / (count - 1) as f64;
                Ok((0..count)
                    .map(|i| if i + 1 == count { stop } else { start + step * i as f64 })
                    .collect())
            }
            _ => Err(usage("give either --f or all of --f-start, --f-stop, --f-count")),
        }
    }

    fn sweep(&self) -> Result<Vec<f64>, CliError> {
        let fs = self.frequencies()?;
        if fs.len() < 2 {
            return Err(usage("a curve needs a sweep: --f-start, --f-stop, --f-count"));
        }
        Ok(fs)
    }
}

impl GuideArgs {
    fn cutoff_wavenumber(&self) -> f64 {
        match self.width {
            Some(a) if !self.tem => std::f64::consts::PI / a,
            _ => 0.0,
        }
    }

    fn medium(&self, medium: &MediumArgs) -> Result<WaveguideSpec, CliError> {
        Ok(WaveguideSpec::new(
            self.cutoff_wavenumber(),
            medium.er,
            medium.tand,
        )?)
    }

    fn cell(&self, text: &str) -> Result<UnitCellSpec, CliError> {
        parse_cell(text, self.cutoff_wavenumber()).map_err(usage)
    }
}

fn parse_termination(text: &str) -> Result<Termination, CliError> {
    match text {
        "matched" => Ok(Termination::Matched),
        "short" => Ok(Termination::Short),
        "open" => Ok(Termination::Open),
        t => {
            let body = t.strip_prefix("gamma:").ok_or_else(|| {
                usage(format!(
                    "unknown termination {t:?}; use matched, short, open or gamma:<mag>@<deg>"
                ))
            })?;
            let gamma = match body.split_once('@') {
                Some((mag, deg)) => {
                    let mag: f64 = mag.parse().map_err(|_| usage(format!("bad magnitude in {t:?}")))?;
                    let deg: f64 = deg.parse().map_err(|_| usage(format!("bad phase in {t:?}")))?;
                    Complex64::from_polar(mag, deg.to_radians())
                }
                None => parse_complex(body).map_err(usage)?,
            };
            Ok(Termination::reflection(gamma)?)
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

/// Writes traces as `trace_0000.trace`, `trace_0001.trace`, ... in frequency
/// order and prints each path.
fn write_traces(dir: &Path, traces: &[FieldTrace]) -> Result<(), CliError> {
    prepare_dir(dir)?;
    for (i, trace) in traces.iter().enumerate() {
        let path = dir.join(format!("trace_{i:04}.trace"));
        write_trace_file(trace, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn noisy(trace: FieldTrace, noise: &NoiseArgs, index: usize) -> Result<FieldTrace, CliError> {
    Ok(add_noise(&trace, noise.noise, noise.seed.wrapping_add(index as u64))?)
}

pub fn synth_uniform(args: &UniformArgs) -> Result<(), CliError> {
    let spec = args.guide.medium(&args.medium)?;
    let freqs = args.freq.frequencies()?;
    let backward = Complex64::from_polar(args.reflection, args.reflection_phase.to_radians());
    let grid = Grid {
        z_start: args.z_start,
        dz: args.dz,
        count: args.count,
    };
    let mut traces = Vec::with_capacity(freqs.len());
    for (i, &f) in freqs.iter().enumerate() {
        let kz = te10_kz(f, &spec)?;
        let trace = synth_uniform_trace(kz, Complex64::new(1.0, 0.0), backward, grid, args.period, f)?;
        traces.push(noisy(trace, &args.noise, i)?);
    }
    write_traces(&args.out, &traces)
}

pub fn synth_periodic(args: &PeriodicArgs) -> Result<(), CliError> {
    if args.cells == 0 {
        return Err(usage("--cells must be at least 1"));
    }
    let cell = args.guide.cell(&args.cell)?;
    let termination = parse_termination(&args.termination)?;
    let options = PeriodicOptions {
        quantity: match args.quantity {
            Quantity::Voltage => ModalQuantity::Voltage,
            Quantity::Current => ModalQuantity::Current,
        },
        margin_cells: args.margin,
    };
    let freqs = args.freq.frequencies()?;
    let mut traces = Vec::with_capacity(freqs.len());
    for (i, &f) in freqs.iter().enumerate() {
        let trace = synth_periodic_trace(
            &cell,
            args.cells,
            termination,
            Complex64::new(1.0, 0.0),
            f,
            args.dz,
            &options,
        )?;
        traces.push(noisy(trace, &args.noise, i)?);
    }
    write_traces(&args.out, &traces)
}

pub fn import(args: &ImportArgs) -> Result<(), CliError> {
    let mapping = match &args.mapping {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            ColumnMapping::from_config_str(&text)?
        }
        None => ColumnMapping::default(),
    };
    let component: Component = args.component.parse().map_err(|_| usage("bad --component"))?;
    let metadata = ImportMetadata {
        frequency_hz: args.frequency,
        period_m: args.period,
        component,
        x_m: args.x,
        y_m: args.y,
    };
    let file = File::open(&args.input).map_err(|e| io_error(&args.input, e))?;
    let trace = import_columns(file, &mapping, &metadata)?;
    write_trace_file(&trace, &args.out)?;
    println!("{}", args.out.display());
    Ok(())
}

/// Expands directories into their `*.trace` files, sorted by name.
fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .map_err(|e| io_error(input, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "trace"))
                .collect();
            found.sort();
            if found.is_empty() {
                return Err(usage(format!("no .trace files in {}", input.display())));
            }
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn anchor_policy(anchor_beta: Option<f64>) -> AnchorPolicy {
    anchor_beta.map_or(AnchorPolicy::LowestFrequency, AnchorPolicy::Beta)
}

fn stopband_mode(output: &CurveOutputArgs) -> StopbandMode {
    if output.lossy {
        StopbandMode::Lossy
    } else {
        StopbandMode::Lossless
    }
}

fn write_curve_outputs(curve: &DispersionCurve, output: &CurveOutputArgs) -> Result<(), CliError> {
    match &output.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(path, e))?;
            write_curve_csv(curve, BufWriter::new(file))?;
        }
        None => write_curve_csv(curve, io::stdout().lock())?,
    }
    if let Some(path) = &output.report {
        let json = CurveReport::from_curve(curve).to_json();
        fs::write(path, json + "\n").map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

pub fn extract(args: &ExtractArgs) -> Result<(), CliError> {
    let t = &args.thresholds;
    let config = SweepConfig {
        aggregate: AggregateConfig {
            extract: ExtractConfig {
                node_threshold: t.node_threshold,
                ..ExtractConfig::default()
            },
            low_condition: t.low_condition,
            high_residual: t.high_residual,
            band_edge_separation: BAND_EDGE_SEPARATION,
            ..AggregateConfig::default()
        },
        anchor: anchor_policy(args.anchor_beta),
        stopband_mode: stopband_mode(&args.output),
        stopbands: StopbandConfig {
            edge_tol: t.edge_tol,
            alpha_floor: t.alpha_floor,
            ..StopbandConfig::default()
        },
        harmonic: args.harmonic,
        stride_override: args.stride,
    };
    let traces = collect_inputs(&args.inputs)?
        .iter()
        .map(|p| read_trace_file(p))
        .collect::<Result<Vec<_>, _>>()?;
    let curve = extract_curve(&traces, &config)?;
    write_curve_outputs(&curve, &args.output)
}

pub fn oracle_te10(args: &Te10Args) -> Result<(), CliError> {
    let spec = args.guide.medium(&args.medium)?;
    let curve = te10_curve(&spec, &args.freq.sweep()?, args.period, BAND_EDGE_SEPARATION)?;
    let curve = detect_stopbands(&curve, stopband_mode(&args.output), &StopbandConfig::default());
    write_curve_outputs(&curve, &args.output)
}

pub fn oracle_bloch(args: &BlochArgs) -> Result<(), CliError> {
    let cell = args.guide.cell(&args.cell)?;
    let curve = bloch_curve(
        &cell,
        &args.freq.sweep()?,
        anchor_policy(args.anchor_beta),
        BAND_EDGE_SEPARATION,
    )?;
    let curve = detect_stopbands(&curve, stopband_mode(&args.output), &StopbandConfig::default());
    write_curve_outputs(&curve, &args.output)
}

fn load_curve(path: &Path) -> Result<DispersionCurve, CliError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    // The period only matters for harmonic shifts, which comparison never
    // applies, so a curve whose period cannot be recovered is still usable.
    match read_curve_csv(file, None) {
        Ok(curve) => Ok(curve),
        Err(_) => {
            let file = File::open(path).map_err(|e| io_error(path, e))?;
            Ok(read_curve_csv(file, Some(1.0))?)
        }
    }
}

/// Returns whether the comparison stayed within tolerance.
pub fn compare(args: &CompareArgs) -> Result<bool, CliError> {
    let a = load_curve(&args.curve)?;
    let b = load_curve(&args.reference)?;
    let options = CompareOptions {
        exclude_band_edge: !args.include_band_edge,
    };
    let report = compare_curves(&a, &b, &options)?;
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    if let Some(path) = &args.out {
        fs::write(path, json.clone() + "\n").map_err(|e| io_error(path, e))?;
    }
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{json}").map_err(|e| io_error(Path::new("<stdout>"), e))?;
    Ok(report.within(args.tol))
}
