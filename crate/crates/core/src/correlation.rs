//! Cross-correlation between LoRa waveforms.
//!
//! The normalized correlation `C(l, m) = (1/Ts) int_0^Ts x(t; l) x*(t; m) dt`
//! has a closed form that depends on the pair only through `l`, `m` and
//! `d = m - l`. The waveforms are not orthogonal in general; `Re C` sets the
//! SNR penalty relative to an orthogonal signal set.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{turns_to_radians, LoraParams, Symbol};
use crate::waveform::envelope_at;

/// Largest SF for which the full `M x M` matrix is materialized.
pub const MAX_MATRIX_SF: u32 = 8;

fn unit(num: i64, m: i64) -> Complex64 {
    Complex64::cis(turns_to_radians(num as i128, m as i128))
}

/// Closed-form complex cross-correlation `C(l, m)`.
pub fn cross_correlation(p: &LoraParams, l: Symbol, m: Symbol) -> Complex64 {
    if l == m {
        return Complex64::new(1.0, 0.0);
    }
    let mm = p.m() as i64;
    let (l, m) = (l.value() as i64, m.value() as i64);
    let d = m - l;
    let ad = d.abs();
    let num = unit(l * d, mm) - unit(m * d, mm);
    let den = Complex64::new(0.0, TAU * ((mm - ad) * ad) as f64);
    num * mm as f64 / den
}

/// Closed-form real part `Re C(l, m)`; returns 1 on the diagonal.
pub fn cross_correlation_real(p: &LoraParams, l: Symbol, m: Symbol) -> f64 {
    if l == m {
        return 1.0;
    }
    let mm = p.m() as i64;
    let (l, m) = (l.value() as i64, m.value() as i64);
    let d = m - l;
    let ad = d.abs();
    let s1 = turns_to_radians((l * d) as i128, mm as i128).sin();
    let s2 = turns_to_radians((m * d) as i128, mm as i128).sin();
    mm as f64 * (s1 - s2) / (TAU * ((mm - ad) * ad) as f64)
}

/// `|C(l, m)|` for a symbol offset `d = |m - l| > 0`:
/// `M |sin(pi d^2 / M)| / (pi (M - d) d)`.
pub fn correlation_magnitude_at_offset(p: &LoraParams, d: usize) -> f64 {
    let mm = p.m() as i128;
    let d = d as i128;
    // sin(pi d^2 / M) = sin(2 pi d^2 / (2M))
    let s = turns_to_radians(d * d, 2 * mm).sin().abs();
    mm as f64 * s / (PI * ((mm - d) * d) as f64)
}

/// Brute-force trapezoidal evaluation of `(1/Ts) int x(t; l) x*(t; m) dt`
/// with `steps` uniform intervals.
pub fn numeric_cross_correlation_oracle(
    p: &LoraParams,
    l: Symbol,
    m: Symbol,
    steps: usize,
) -> Result<Complex64> {
    let min = 64 * p.m();
    if steps < min {
        return Err(Error::InvalidParameter(format!(
            "oracle needs at least {min} steps, got {steps}"
        )));
    }
    let ts = p.symbol_duration();
    let h = ts / steps as f64;
    let g = |i: usize| {
        let t = if i == steps { ts } else { i as f64 * h };
        envelope_at(p, l, t) * envelope_at(p, m, t).conj()
    };
    let interior: Complex64 = (1..steps).map(g).sum();
    Ok((interior + (g(0) + g(steps)) * 0.5) / steps as f64)
}

/// Trapezoidal oracle for every pair at once: each waveform is sampled a
/// single time and the `M x M` matrix (row-major) is filled by Hermitian
/// symmetry.
pub fn numeric_cross_correlation_matrix(p: &LoraParams, steps: usize) -> Result<Vec<Complex64>> {
    let min = 64 * p.m();
    if steps < min {
        return Err(Error::InvalidParameter(format!(
            "oracle needs at least {min} steps, got {steps}"
        )));
    }
    let m = p.m();
    let ts = p.symbol_duration();
    let h = ts / steps as f64;
    let waves: Vec<Vec<Complex64>> = (0..m as u32)
        .into_par_iter()
        .map(|a| {
            let a = Symbol::new(a, p).unwrap();
            (0..=steps)
                .map(|i| {
                    let t = if i == steps { ts } else { i as f64 * h };
                    let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
                    envelope_at(p, a, t) * w
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|l| {
            let wl = &waves[l];
            (l..m)
                .map(|k| {
                    let wk = &waves[k];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (i, (x, y)) in wl.iter().zip(wk).enumerate() {
                        // weights were folded into both factors; undo one at the ends
                        let scale = if i == 0 || i == steps { 2.0 } else { 1.0 };
                        acc += x * y.conj() * scale;
                    }
                    acc / steps as f64
                })
                .collect()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); m * m];
    for (l, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            let k = l + j;
            out[l * m + k] = v;
            out[k * m + l] = v.conj();
        }
    }
    Ok(out)
}

/// Maxima of the cross-correlation over all pairs `l != m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxCorrelation {
    pub max_abs: f64,
    pub max_abs_real: f64,
    /// A pair attaining `max_abs_real`.
    pub argmax_real: (u32, u32),
    /// Offset `|m - l|` attaining `max_abs`.
    pub argmax_offset: usize,
}

/// Exhaustive scan over all pairs. By conjugate symmetry only `m > l` is visited.
pub fn max_cross_correlation(p: &LoraParams) -> MaxCorrelation {
    let mm = p.m();
    let (max_abs, argmax_offset) = (1..mm)
        .map(|d| (correlation_magnitude_at_offset(p, d), d))
        .fold(
            (0.0, 1),
            |best, cur| if cur.0 > best.0 { cur } else { best },
        );

    let (max_abs_real, argmax_real) = (1..mm)
        .into_par_iter()
        .map(|d| {
            let mut best = (0.0f64, (0u32, d as u32));
            for l in 0..(mm - d) {
                let l = l as u32;
                let m = l + d as u32;
                let v = cross_correlation_real(
                    p,
                    Symbol::new(l, p).unwrap(),
                    Symbol::new(m, p).unwrap(),
                )
                .abs();
                if v > best.0 {
                    best = (v, (l, m));
                }
            }
            best
        })
        .reduce(
            || (0.0, (0, 1)),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );

    MaxCorrelation {
        max_abs,
        max_abs_real,
        argmax_real,
        argmax_offset,
    }
}

/// `max |C|` restricted to offsets `1 <= d <= floor(sqrt(M/2))`, where the
/// first (and global) maximum of `|C|` lies.
pub fn max_abs_in_first_lobe(p: &LoraParams) -> f64 {
    let limit = ((p.m() / 2) as f64).sqrt().floor() as usize;
    (1..=limit.max(1))
        .map(|d| correlation_magnitude_at_offset(p, d))
        .fold(0.0, f64::max)
}

/// Upper bound `1 / (sqrt(2M) - 1)` on `max |C|`.
pub fn correlation_bound(p: &LoraParams) -> f64 {
    1.0 / ((2.0 * p.m() as f64).sqrt() - 1.0)
}

/// Worst-case SNR penalty `-10 log10(1 - max |Re C|)` in dB.
pub fn snr_penalty_db(p: &LoraParams) -> f64 {
    penalty_from_correlation(max_cross_correlation(p).max_abs_real)
}

pub fn penalty_from_correlation(max_abs_real: f64) -> f64 {
    -10.0 * (1.0 - max_abs_real).log10()
}

/// Offsets `d = |m - l|` with `C(l, m) = 0` for every pair: `d = 2^((p + SF)/2) < M`
/// with `p >= 0` of the same parity as SF.
pub fn orthogonality_offsets(params: &LoraParams) -> Vec<usize> {
    let sf = params.sf();
    let m = params.m();
    (0..)
        .map(|k| sf % 2 + 2 * k)
        .map(|pw| 1usize << ((pw + sf) / 2))
        .take_while(|&d| d < m)
        .collect()
}

/// Every offset `d` in `[1, M)` with `C(l, l + d) = 0` for all `l`: the
/// multiples of `2^ceil(SF/2)`, i.e. the `d` with `d^2 / M` an integer.
/// The powers of two from [`orthogonality_offsets`] are a subset.
pub fn zero_correlation_offsets(params: &LoraParams) -> Vec<usize> {
    let m = params.m();
    (1..m).filter(|d| (d * d) % m == 0).collect()
}

/// Pairs `(l, m)`, `l < m`, whose passband waveforms are orthogonal
/// (`Re C = 0`): either `(m - l)^2 / M` or `(m^2 - l^2)/M - 1/2` is an integer.
pub fn real_orthogonal_pairs(p: &LoraParams) -> Vec<(u32, u32)> {
    let mm = p.m() as u64;
    let mut out = Vec::new();
    for l in 0..mm {
        for m in (l + 1)..mm {
            let d = m - l;
            let complex_zero = (d * d) % mm == 0;
            // (m^2 - l^2)/M - 1/2 in Z  <=>  2 d (m + l) = M (mod 2M)
            let passband_zero = (2 * d * (m + l)) % (2 * mm) == mm;
            if complex_zero || passband_zero {
                out.push((l as u32, m as u32));
            }
        }
    }
    out
}

/// Correlation summary for one parameter set.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    /// Row-major `M x M` matrix, present only for `SF <= MAX_MATRIX_SF`.
    pub matrix: Option<Vec<Complex64>>,
    pub max_abs_real: f64,
    pub max_abs: f64,
    pub argmax_pair: (u32, u32),
    pub bound: f64,
    pub penalty_db: f64,
}

pub fn correlation_report(p: &LoraParams, with_matrix: bool) -> CorrelationReport {
    let max = max_cross_correlation(p);
    let matrix = (with_matrix && p.sf() <= MAX_MATRIX_SF).then(|| correlation_matrix(p));
    CorrelationReport {
        matrix,
        max_abs_real: max.max_abs_real,
        max_abs: max.max_abs,
        argmax_pair: max.argmax_real,
        bound: correlation_bound(p),
        penalty_db: penalty_from_correlation(max.max_abs_real),
    }
}

fn correlation_matrix(p: &LoraParams) -> Vec<Complex64> {
    let m = p.m() as u32;
    let mut out = Vec::with_capacity((m * m) as usize);
    for l in 0..m {
        for k in 0..m {
            out.push(cross_correlation(
                p,
                Symbol::new(l, p).unwrap(),
                Symbol::new(k, p).unwrap(),
            ));
        }
    }
    out
}
