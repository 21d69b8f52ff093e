use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::SpectrumResult;

/// Power integrated over adjacent bins of width `delta_f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedSpectrum {
    /// Baseband bin centres in Hz, ascending.
    pub bin_centers: Vec<f64>,
    pub bin_power_dbm: Vec<f64>,
    pub delta_f: f64,
    pub ps_dbm: f64,
    /// Bin centres sit at `j delta_f + edge_offset`.
    pub edge_offset: f64,
    /// Share of the spectrum's power (grid integral plus all lines) that
    /// falls outside every bin.
    pub residual_fraction: f64,
}

impl BinnedSpectrum {
    /// Bin powers in mW.
    pub fn bin_power_mw(&self) -> Vec<f64> {
        self.bin_power_dbm
            .iter()
            .map(|d| 10f64.powf(d / 10.0))
            .collect()
    }
}

const EDGE_CLEARANCE: f64 = 1e-6;
const OFFSET_CANDIDATES: [f64; 5] = [0.0, 0.5, 0.25, 1.0 / 3.0, 0.125];

/// Bin the spectrum, shifting bin edges off the line frequencies when needed
/// so that each line falls strictly inside one bin.
pub fn binned_power(spec: &SpectrumResult, delta_f: f64, ps_dbm: f64) -> Result<BinnedSpectrum> {
    check_delta(delta_f)?;
    let clear = |offset: f64| {
        spec.lines.iter().filter(|l| l.power > 0.0).all(|l| {
            let pos = ((l.freq_hz - offset) / delta_f + 0.5).rem_euclid(1.0);
            pos > EDGE_CLEARANCE && pos < 1.0 - EDGE_CLEARANCE
        })
    };
    let offset = OFFSET_CANDIDATES
        .iter()
        .map(|c| c * delta_f)
        .find(|&o| clear(o))
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "no bin alignment keeps every line off the edges for delta_f = {delta_f}"
            ))
        })?;
    binned_power_with_offset(spec, delta_f, offset, ps_dbm)
}

/// Bin the spectrum with centres at `j delta_f + offset`. A line exactly on
/// an edge belongs to the bin above it.
pub fn binned_power_with_offset(
    spec: &SpectrumResult,
    delta_f: f64,
    offset: f64,
    ps_dbm: f64,
) -> Result<BinnedSpectrum> {
    check_delta(delta_f)?;
    if spec.grid.len() < 2 || spec.grid.len() != spec.continuous.len() {
        return Err(Error::InvalidParameter(
            "spectrum needs at least two grid points and matching values".into(),
        ));
    }
    let grid = &spec.grid;
    let (g0, g1) = (grid[0], grid[grid.len() - 1]);
    let first = ((g0 - offset) / delta_f + 0.5).ceil() as i64;
    let last = ((g1 - offset) / delta_f - 0.5).floor() as i64;
    if last < first {
        return Err(Error::InvalidParameter(format!(
            "bin width {delta_f} Hz exceeds the spectrum span"
        )));
    }
    let prefix = prefix_integral(&spec.grid, &spec.continuous);
    let integral_to = |x: f64| interpolated_integral(&spec.grid, &spec.continuous, &prefix, x);

    let count = (last - first + 1) as usize;
    let mut power = vec![0.0; count];
    let centers: Vec<f64> = (first..=last)
        .map(|j| j as f64 * delta_f + offset)
        .collect();
    let mut lower = integral_to(centers[0] - 0.5 * delta_f);
    for (slot, c) in power.iter_mut().zip(&centers) {
        let upper = integral_to(c + 0.5 * delta_f);
        *slot = upper - lower;
        lower = upper;
    }
    for line in &spec.lines {
        let j = ((line.freq_hz - offset) / delta_f + 0.5).floor() as i64;
        if (first..=last).contains(&j) {
            power[(j - first) as usize] += line.power;
        }
    }
    let total = prefix[prefix.len() - 1] + spec.line_power();
    let inside: f64 = power.iter().sum();
    Ok(BinnedSpectrum {
        bin_power_dbm: power
            .iter()
            .map(|&p| ps_dbm + 10.0 * p.max(1e-300).log10())
            .collect(),
        bin_centers: centers,
        delta_f,
        ps_dbm,
        edge_offset: offset,
        residual_fraction: (total - inside) / total,
    })
}

fn check_delta(delta_f: f64) -> Result<()> {
    if delta_f > 0.0 && delta_f.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "bin width must be positive, got {delta_f}"
        )))
    }
}

fn prefix_integral(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(x.len());
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// Integral of the piecewise-linear interpolant from `x[0]` to `t`.
fn interpolated_integral(x: &[f64], y: &[f64], prefix: &[f64], t: f64) -> f64 {
    if t <= x[0] {
        return 0.0;
    }
    if t >= x[x.len() - 1] {
        return prefix[prefix.len() - 1];
    }
    let i = x.partition_point(|&v| v <= t) - 1;
    let h = x[i + 1] - x[i];
    let u = t - x[i];
    let slope = (y[i + 1] - y[i]) / h;
    prefix[i] + u * (y[i] + 0.5 * slope * u)
}
