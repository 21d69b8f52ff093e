//! IQ capture files, spectrum CSV files and payload mapping.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{LoraParams, Symbol};
use crate::spectrum::{SpectralLine, SpectrumResult};
use crate::waveform::IqBuffer;

/// Sample encoding of an IQ payload file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IqFormat {
    /// Little-endian `f32` pairs `I, Q`.
    #[serde(rename = "interleaved-f32-le")]
    InterleavedF32Le,
    /// Text with a header row `i,q`.
    #[serde(rename = "csv")]
    Csv,
}

/// JSON sidecar describing an IQ payload file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqFileHeader {
    pub format: IqFormat,
    pub fs_hz: f64,
    #[serde(default)]
    pub center_freq_hz: f64,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
}

/// `<path>.json`.
pub fn default_header_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn read_header(header_path: &Path) -> Result<IqFileHeader> {
    let text = std::fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header: IqFileHeader = serde_json::from_str(&text)
        .map_err(|e| Error::format(header_path, format!("bad header: {e}")))?;
    if !(header.fs_hz > 0.0 && header.fs_hz.is_finite()) {
        return Err(Error::format(
            header_path,
            format!("fs_hz must be positive, got {}", header.fs_hz),
        ));
    }
    Ok(header)
}

/// Read samples described by the sidecar at `header_path`.
pub fn read_iq(path: &Path, header_path: &Path) -> Result<IqBuffer> {
    let header = read_header(header_path)?;
    let samples = match header.format {
        IqFormat::InterleavedF32Le => read_binary(path)?,
        IqFormat::Csv => read_csv(path)?,
    };
    if let Some(n) = header.sample_count {
        if n != samples.len() {
            return Err(Error::format(
                path,
                format!(
                    "header declares {n} samples, payload holds {}",
                    samples.len()
                ),
            ));
        }
    }
    IqBuffer::new(samples, header.fs_hz)
}

fn read_binary(path: &Path) -> Result<Vec<Complex64>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::format(
            path,
            format!(
                "{} bytes is not a whole number of I/Q f32 pairs",
                bytes.len()
            ),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let i = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let q = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(i as f64, q as f64)
        })
        .collect())
}

fn read_csv(path: &Path) -> Result<Vec<Complex64>> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?;
    if headers.len() != 2 || &headers[0] != "i" || &headers[1] != "q" {
        return Err(Error::format(path, "expected header row \"i,q\""));
    }
    reader
        .deserialize::<(f64, f64)>()
        .map(|r| {
            r.map(|(i, q)| Complex64::new(i, q))
                .map_err(|e| Error::format(path, e.to_string()))
        })
        .collect()
}

/// Write samples plus a JSON sidecar. Binary output stores `f32`.
pub fn write_iq(
    buffer: &IqBuffer,
    path: &Path,
    header_path: &Path,
    format: IqFormat,
    center_freq_hz: f64,
    description: &str,
) -> Result<()> {
    match format {
        IqFormat::InterleavedF32Le => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            for s in &buffer.samples {
                w.write_all(&(s.re as f32).to_le_bytes())
                    .and_then(|_| w.write_all(&(s.im as f32).to_le_bytes()))
                    .map_err(|e| Error::io(path, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        IqFormat::Csv => {
            let mut w =
                csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
            w.write_record(["i", "q"])
                .map_err(|e| Error::format(path, e.to_string()))?;
            for s in &buffer.samples {
                w.write_record([s.re.to_string(), s.im.to_string()])
                    .map_err(|e| Error::format(path, e.to_string()))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
    }
    let header = IqFileHeader {
        format,
        fs_hz: buffer.fs,
        center_freq_hz,
        description: description.to_string(),
        sample_count: Some(buffer.len()),
    };
    let text = serde_json::to_string_pretty(&header)?;
    std::fs::write(header_path, text + "\n").map_err(|e| Error::io(header_path, e))
}

/// `<prefix>.continuous.csv` and `<prefix>.lines.csv`.
pub fn spectrum_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".continuous.csv"), with(".lines.csv"))
}

/// Write the continuous part (`freq_hz,psd_per_hz`) and the lines
/// (`freq_hz,power`). Values use shortest round-trip formatting.
pub fn write_spectrum(spec: &SpectrumResult, prefix: &Path) -> Result<()> {
    let (cont, lines) = spectrum_paths(prefix);
    write_pairs(
        &cont,
        ["freq_hz", "psd_per_hz"],
        spec.grid
            .iter()
            .copied()
            .zip(spec.continuous.iter().copied()),
    )?;
    write_pairs(
        &lines,
        ["freq_hz", "power"],
        spec.lines.iter().map(|l| (l.freq_hz, l.power)),
    )
}

pub fn read_spectrum(prefix: &Path) -> Result<SpectrumResult> {
    let (cont, lines) = spectrum_paths(prefix);
    let (grid, continuous) = read_pairs(&cont, ["freq_hz", "psd_per_hz"])?
        .into_iter()
        .unzip();
    let lines = read_pairs(&lines, ["freq_hz", "power"])?
        .into_iter()
        .map(|(freq_hz, power)| SpectralLine { freq_hz, power })
        .collect();
    Ok(SpectrumResult {
        grid,
        continuous,
        lines,
        params: None,
    })
}

/// `freq_hz,psd_per_hz` rows.
pub fn write_psd_csv(path: &Path, rows: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    write_pairs(path, ["freq_hz", "psd_per_hz"], rows)
}

/// `freq_hz,level_dbm_per_hz` rows.
pub fn write_level_csv(path: &Path, rows: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    write_pairs(path, ["freq_hz", "level_dbm_per_hz"], rows)
}

fn write_pairs(
    path: &Path,
    header: [&str; 2],
    rows: impl Iterator<Item = (f64, f64)>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    w.write_record(header)
        .map_err(|e| Error::format(path, e.to_string()))?;
    for (a, b) in rows {
        w.write_record([a.to_string(), b.to_string()])
            .map_err(|e| Error::format(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_pairs(path: &Path, header: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let found = reader
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?;
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::format(
            path,
            format!("expected header row \"{}\"", header.join(",")),
        ));
    }
    reader
        .deserialize::<(f64, f64)>()
        .map(|r| r.map_err(|e| Error::format(path, e.to_string())))
        .collect()
}

/// Decode a hex string such as `"0xDEADbeef"` or `"de ad be ef"`.
pub fn parse_hex(text: &str) -> Result<Vec<u8>> {
    let cleaned: String = text
        .trim()
        .trim_start_matches("0x")
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .collect();
    hex::decode(&cleaned).map_err(|e| Error::InvalidParameter(format!("bad hex payload: {e}")))
}

/// Split the payload, read as a big-endian bit stream, into SF-bit symbols;
/// the last symbol is padded with zero bits.
pub fn payload_to_symbols(payload: &[u8], p: &LoraParams) -> Vec<Symbol> {
    let sf = p.sf() as usize;
    let total_bits = payload.len() * 8;
    let bit = |i: usize| (payload[i / 8] >> (7 - i % 8)) & 1;
    (0..total_bits.div_ceil(sf))
        .map(|s| {
            let value = (0..sf).fold(0u32, |acc, j| {
                let i = s * sf + j;
                (acc << 1) | if i < total_bits { bit(i) as u32 } else { 0 }
            });
            Symbol::new(value, p).expect("SF-bit value is below M")
        })
        .collect()
}
