use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lora_core::analysis::{binned_power, mask_check, reproduce_table, welch_psd, MaskSpec, Window};
use lora_core::correlation::correlation_report;
use lora_core::error::{Error, Result};
use lora_core::io::{
    default_header_path, parse_hex, payload_to_symbols, read_iq, read_spectrum, write_iq,
    write_spectrum, IqFormat,
};
use lora_core::params::{LoraParams, Symbol};
use lora_core::receiver::{awgn, demodulate_stream};
use lora_core::spectrum::{psd_via_dft, DftConfig, SpectrumResult};
use lora_core::waveform::modulate;

#[derive(Parser)]
#[command(name = "lora", version, about = "LoRa chirp modulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Modulation {
    /// Spreading factor
    #[arg(long)]
    sf: u32,
    /// Bandwidth (frequency deviation) in Hz
    #[arg(long, default_value_t = 125e3)]
    bw: f64,
}

impl Modulation {
    fn params(self) -> Result<LoraParams> {
        LoraParams::new(self.sf, self.bw)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    Binary,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Fresnel,
    Dft,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    Hann,
    Hamming,
    Rectangular,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a baseband IQ stream
    Modulate {
        #[command(flatten)]
        modulation: Modulation,
        /// Comma-separated symbol values
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "payload_hex",
            required_unless_present = "payload_hex"
        )]
        symbols: Vec<u32>,
        /// Payload bytes as hex, split big-endian into SF-bit symbols
        #[arg(long)]
        payload_hex: Option<String>,
        #[arg(long, default_value_t = 1)]
        oversample: usize,
        /// Add complex white Gaussian noise at this SNR
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Sidecar path, default <out>.json
        #[arg(long)]
        header: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FileFormat::Binary)]
        format: FileFormat,
        #[arg(long, default_value_t = 0.0)]
        center_freq: f64,
    },
    /// Demodulate an IQ file; prints the symbols as JSON
    Demod {
        #[command(flatten)]
        modulation: Modulation,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        header: Option<PathBuf>,
    },
    /// Cross-correlation summary as JSON
    Xcorr {
        #[command(flatten)]
        modulation: Modulation,
        /// Write the complex correlation matrix to this CSV (SF <= 8)
        #[arg(long)]
        full_matrix: Option<PathBuf>,
    },
    /// Power spectrum to <out>.continuous.csv and <out>.lines.csv
    Spectrum {
        #[command(flatten)]
        modulation: Modulation,
        #[arg(long, value_enum, default_value_t = Method::Fresnel)]
        method: Method,
        /// Grid step in Hz; must be B / (k M) for a whole k. Default B / (8M)
        #[arg(long)]
        grid_step: Option<f64>,
        /// Half-width of the frequency span in Hz. Default 2B
        #[arg(long)]
        span: Option<f64>,
        /// Samples per symbol for the DFT method. Default 16M
        #[arg(long)]
        samples_per_symbol: Option<usize>,
        /// Also write absolute levels for this transmit power
        #[arg(long)]
        ps_dbm: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spectral efficiency, correlation, 99% bandwidth, line power and SNR penalty per SF
    Table {
        #[arg(long, value_delimiter = ',', default_value = "3,5,7,10,12")]
        sf_list: Vec<u32>,
        #[arg(long, default_value_t = 125e3)]
        bw: f64,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
    },
    /// Welch PSD estimate of an IQ file as CSV
    Welch {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        header: Option<PathBuf>,
        /// Segment length in samples
        #[arg(long, default_value_t = 512)]
        segment: usize,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
        window: WindowArg,
        /// Output CSV, default stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a spectrum against an emission mask; exit status 2 on failure
    MaskCheck {
        /// Prefix of a spectrum written by `spectrum`
        #[arg(long, conflicts_with = "sf", required_unless_present = "sf")]
        spectrum_csv: Option<PathBuf>,
        #[arg(long)]
        sf: Option<u32>,
        #[arg(long, default_value_t = 125e3)]
        bw: f64,
        #[arg(long, default_value_t = 14.0)]
        ps_dbm: f64,
        #[arg(long)]
        mask: PathBuf,
        /// Carrier frequency in Hz
        #[arg(long)]
        f0: f64,
        /// Bin width in Hz, default the smallest mask rbw
        #[arg(long)]
        delta_f: Option<f64>,
        /// Lower every mask limit by this many dB
        #[arg(long, default_value_t = 0.0)]
        tighten_db: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn header_for(path: &Path, header: Option<PathBuf>) -> PathBuf {
    header.unwrap_or_else(|| default_header_path(path))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    Ok(())
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Modulate {
            modulation,
            symbols,
            payload_hex,
            oversample,
            snr_db,
            seed,
            out,
            header,
            format,
            center_freq,
        } => {
            let p = modulation.params()?;
            let symbols: Vec<Symbol> = match payload_hex {
                Some(hex) => payload_to_symbols(&parse_hex(&hex)?, &p),
                None => symbols
                    .iter()
                    .map(|&v| Symbol::new(v, &p))
                    .collect::<Result<_>>()?,
            };
            let mut iq = modulate(&p, &symbols, oversample)?;
            if let Some(snr) = snr_db {
                iq = awgn(&iq, snr, seed)?;
            }
            let format = match format {
                FileFormat::Binary => IqFormat::InterleavedF32Le,
                FileFormat::Csv => IqFormat::Csv,
            };
            let description = format!(
                "SF{} B={} Hz, {} symbols",
                p.sf(),
                p.bandwidth(),
                symbols.len()
            );
            let header = header_for(&out, header);
            write_iq(&iq, &out, &header, format, center_freq, &description)?;
        }
        Command::Demod {
            modulation,
            input,
            header,
        } => {
            let p = modulation.params()?;
            let iq = read_iq(&input, &header_for(&input, header))?;
            let symbols: Vec<u32> = demodulate_stream(&iq, &p)?
                .iter()
                .map(|s| s.value())
                .collect();
            print_json(&json!({ "symbols": symbols }))?;
        }
        Command::Xcorr {
            modulation,
            full_matrix,
        } => {
            let p = modulation.params()?;
            let report = correlation_report(&p, full_matrix.is_some());
            if let Some(path) = full_matrix {
                let matrix = report.matrix.as_ref().ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "full matrix is limited to SF <= {}",
                        lora_core::correlation::MAX_MATRIX_SF
                    ))
                })?;
                write_matrix(&path, p.m(), matrix)?;
            }
            print_json(&json!({
                "sf": p.sf(),
                "max_abs_real": report.max_abs_real,
                "max_abs": report.max_abs,
                "argmax_pair": [report.argmax_pair.0, report.argmax_pair.1],
                "bound": report.bound,
                "delta_max_db": report.penalty_db,
            }))?;
        }
        Command::Spectrum {
            modulation,
            method,
            grid_step,
            span,
            samples_per_symbol,
            ps_dbm,
            out,
        } => {
            let p = modulation.params()?;
            let spacing = p.bandwidth() / p.m() as f64;
            let per_line = match grid_step {
                None => 8,
                Some(step) => {
                    let k = spacing / step;
                    if !(k >= 1.0 && (k - k.round()).abs() < 1e-9 * k) {
                        return Err(Error::InvalidParameter(format!(
                            "grid step {step} Hz must be B/M = {spacing} Hz divided by a whole number"
                        )));
                    }
                    k.round() as usize
                }
            };
            let span = span.unwrap_or(2.0 * p.bandwidth());
            let spec = match method {
                Method::Fresnel => SpectrumResult::fresnel(&p, per_line, span)?,
                Method::Dft => {
                    let cfg = DftConfig {
                        samples_per_symbol: samples_per_symbol.unwrap_or(16 * p.m()),
                        zero_pad: per_line,
                        extrapolate: true,
                    };
                    restrict(psd_via_dft(&p, &cfg)?, span)
                }
            };
            write_spectrum(&spec, &out)?;
            if let Some(ps) = ps_dbm {
                let mut path = out.as_os_str().to_owned();
                path.push(".dbm.csv");
                let scale = 10f64.powf(ps / 10.0);
                lora_core::io::write_level_csv(
                    Path::new(&path),
                    spec.grid
                        .iter()
                        .zip(&spec.continuous)
                        .map(|(&f, &g)| (f, 10.0 * (g * scale).log10())),
                )?;
            }
        }
        Command::Table {
            sf_list,
            bw,
            format,
        } => {
            let rows = reproduce_table(&sf_list, bw)?;
            match format {
                TableFormat::Json => print_json(&rows)?,
                TableFormat::Csv => {
                    let mut w = csv::Writer::from_writer(std::io::stdout());
                    for row in &rows {
                        w.serialize(row)
                            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                    }
                    w.flush().map_err(|e| Error::io("<stdout>", e))?;
                }
            }
        }
        Command::Welch {
            input,
            header,
            segment,
            overlap,
            window,
            out,
        } => {
            let iq = read_iq(&input, &header_for(&input, header))?;
            let window = match window {
                WindowArg::Hann => Window::Hann,
                WindowArg::Hamming => Window::Hamming,
                WindowArg::Rectangular => Window::Rectangular,
            };
            let est = welch_psd(&iq, segment, overlap, window)?;
            let rows = est.freqs.iter().copied().zip(est.psd.iter().copied());
            match out {
                Some(path) => lora_core::io::write_psd_csv(&path, rows)?,
                None => {
                    let mut stdout = std::io::stdout().lock();
                    let write = |s: &mut std::io::StdoutLock| -> std::io::Result<()> {
                        writeln!(s, "freq_hz,psd_per_hz")?;
                        for (f, g) in rows {
                            writeln!(s, "{f},{g}")?;
                        }
                        Ok(())
                    };
                    write(&mut stdout).map_err(|e| Error::io("<stdout>", e))?;
                }
            }
        }
        Command::MaskCheck {
            spectrum_csv,
            sf,
            bw,
            ps_dbm,
            mask,
            f0,
            delta_f,
            tighten_db,
        } => {
            let text = std::fs::read_to_string(&mask).map_err(|e| Error::io(&mask, e))?;
            let mut mask = MaskSpec::from_json(&text)?;
            if tighten_db != 0.0 {
                mask = mask.tightened(tighten_db);
            }
            let delta_f = match delta_f {
                Some(d) => d,
                None => mask
                    .segments
                    .iter()
                    .map(|s| s.rbw_hz)
                    .fold(f64::INFINITY, f64::min),
            };
            if !delta_f.is_finite() {
                return Err(Error::InvalidParameter(
                    "empty mask needs an explicit --delta-f".into(),
                ));
            }
            let spec = match (spectrum_csv, sf) {
                (Some(prefix), _) => read_spectrum(&prefix)?,
                (None, Some(sf)) => {
                    let p = LoraParams::new(sf, bw)?;
                    let reach = mask
                        .segments
                        .iter()
                        .flat_map(|s| [(s.f_start_hz - f0).abs(), (s.f_stop_hz - f0).abs()])
                        .fold(2.0 * bw, f64::max);
                    SpectrumResult::fresnel(&p, 8, reach + 2.0 * delta_f)?
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            let binned = binned_power(&spec, delta_f, ps_dbm)?;
            let report = mask_check(&binned, &mask, f0)?;
            print_json(&report)?;
            if !report.pass {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn restrict(spec: SpectrumResult, span: f64) -> SpectrumResult {
    let keep: Vec<usize> = (0..spec.grid.len())
        .filter(|&i| spec.grid[i].abs() <= span)
        .collect();
    SpectrumResult {
        grid: keep.iter().map(|&i| spec.grid[i]).collect(),
        continuous: keep.iter().map(|&i| spec.continuous[i]).collect(),
        lines: spec.lines,
        params: spec.params,
    }
}

fn write_matrix(path: &Path, m: usize, matrix: &[num_complex::Complex64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let err = |e: csv::Error| Error::io(path, e.into());
    w.write_record(["l", "m", "re", "im"]).map_err(err)?;
    for (idx, c) in matrix.iter().enumerate() {
        w.write_record([
            (idx / m).to_string(),
            (idx % m).to_string(),
            c.re.to_string(),
            c.im.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
