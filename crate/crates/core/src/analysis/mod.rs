//! Derived figures of merit, the summary table, binned power, mask
//! compliance and Welch estimation.

mod binning;
mod mask;
mod welch;

use serde::Serialize;

use crate::correlation::{max_cross_correlation, penalty_from_correlation};
use crate::error::{Error, Result};
use crate::params::LoraParams;
use crate::spectrum::uniform_components;

pub use binning::{binned_power, binned_power_with_offset, BinnedSpectrum};
pub use mask::{mask_check, MaskReport, MaskSegment, MaskSpec, SegmentReport};
pub use welch::{welch_psd, WelchEstimate, Window};

/// `R_b = B SF / 2^SF` in bit/s.
pub fn bit_rate(p: &LoraParams) -> f64 {
    p.bandwidth() * spectral_efficiency(p.sf())
}

/// `R_c = M / Ts = B`.
pub fn chip_rate(p: &LoraParams) -> f64 {
    p.bandwidth()
}

/// `SF / 2^SF` in bit/s/Hz.
pub fn spectral_efficiency(sf: u32) -> f64 {
    sf as f64 / (1u64 << sf) as f64
}

/// Grid points per line spacing used for occupied-bandwidth integration.
pub const OBW_POINTS_PER_LINE: usize = 8;
/// Largest half-width searched, in multiples of `B`.
pub const OBW_MAX_HALF_SPAN: f64 = 8.0;

/// Smallest `W` such that `[-W/2, W/2]` holds `fraction` of the signal power,
/// lines on the interval edges included.
///
/// The continuous part is integrated with the trapezoid rule on a grid of
/// step `B / (8M)`, extended outward in chunks of `B/2` until the target is
/// met. Within the final cell the crossing is solved on the linear
/// interpolant, so the result is continuous and monotone in `fraction`.
pub fn occupied_bandwidth(p: &LoraParams, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let m = p.m();
    let k = OBW_POINTS_PER_LINE;
    let spacing = p.bandwidth() / m as f64;
    // work in units of nu = f Ts; the PSD in those units is Gc * B / M
    let h = 1.0 / k as f64;
    let chunk = (k * m / 2).max(k);
    let last = (OBW_MAX_HALF_SPAN * (k * m) as f64).round() as usize;

    let mut captured = 0.0;
    let mut prev_g = 0.0;
    let mut start = 0;
    while start <= last {
        let end = (start + chunk).min(last + 1);
        let comps = uniform_components(p, start as f64 * h, k, end - start);
        for (offset, &(gc, line)) in comps.iter().enumerate() {
            let i = start + offset;
            let g = gc * spacing;
            if i > 0 {
                let cell = h * (prev_g + g);
                if captured + cell >= fraction {
                    let u = solve_in_cell(prev_g, g, h, (fraction - captured) / 2.0);
                    return Ok(2.0 * ((i - 1) as f64 * h + u) * spacing);
                }
                captured += cell;
            }
            if i % k == 0 {
                captured += if i == 0 { line } else { 2.0 * line };
                if captured >= fraction {
                    return Ok(2.0 * i as f64 * h * spacing);
                }
            }
            prev_g = g;
        }
        start = end;
    }
    Err(Error::FractionUnreachable {
        requested: fraction,
        captured,
        half_span_hz: OBW_MAX_HALF_SPAN * p.bandwidth(),
    })
}

/// `u` in `[0, h]` with `int_0^u (g0 + (g1 - g0) s / h) ds = area`.
fn solve_in_cell(g0: f64, g1: f64, h: f64, area: f64) -> f64 {
    let integral = |u: f64| g0 * u + (g1 - g0) * u * u / (2.0 * h);
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if integral(mid) < area {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// One row of the modulation summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub sf: u32,
    /// Spectral efficiency `SF / 2^SF` in bit/s/Hz.
    pub eff: f64,
    pub max_re_c: f64,
    pub b99_hz: f64,
    /// `B99 / B`.
    pub b99_over_b: f64,
    /// Fraction of the power carried by spectral lines, `2^-SF`.
    pub pd: f64,
    pub delta_max_db: f64,
}

/// Summary table for each spreading factor, every entry computed from the
/// waveform definitions.
pub fn reproduce_table(sf_list: &[u32], bandwidth_hz: f64) -> Result<Vec<TableRow>> {
    sf_list
        .iter()
        .map(|&sf| {
            if !(3..=12).contains(&sf) {
                return Err(Error::InvalidParameter(format!(
                    "table rows need SF in 3..=12, got {sf}"
                )));
            }
            let p = LoraParams::new(sf, bandwidth_hz)?;
            let corr = max_cross_correlation(&p);
            let b99 = occupied_bandwidth(&p, 0.99)?;
            Ok(TableRow {
                sf,
                eff: spectral_efficiency(sf),
                max_re_c: corr.max_abs_real,
                b99_hz: b99,
                b99_over_b: b99 / bandwidth_hz,
                pd: 1.0 / p.m() as f64,
                delta_max_db: penalty_from_correlation(corr.max_abs_real),
            })
        })
        .collect()
}
