//! Power spectrum of the randomly modulated LoRa signal.
//!
//! With i.i.d. equiprobable symbols the PSD splits into a continuous part
//!
//! ```text
//! Gc(f) = 1/(Ts M) [ sum_l |X(f;l)|^2 - (1/M) |sum_l X(f;l)|^2 ]
//! ```
//!
//! and spectral lines at `f = n B / M` with power
//! `|sum_l X(nB/M; l)|^2 / (Ts^2 M^2)`, where `X(f; l)` is the Fourier
//! transform of the single-symbol waveform. `X` has a closed form in terms of
//! Fresnel integrals. All values here are for unit signal power (`gamma = 1`);
//! scaling to a transmit power happens in [`crate::analysis`].

mod dft;
pub mod fresnel;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{LoraParams, Symbol};
use crate::waveform::mean_envelope_magnitude;

pub use dft::{psd_via_dft, DftConfig};
pub use fresnel::{fresnel, fresnel_k, FresnelPair};

/// `W(a; b; t1; t2) = int_t1^t2 exp{j 2 pi (a t + b t^2)} dt` for `b > 0`.
pub fn w_integral(a: f64, b: f64, t1: f64, t2: f64) -> Result<Complex64> {
    if b.is_nan() || b <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "W integral needs b > 0, got {b}"
        )));
    }
    if t1 > t2 {
        return Err(Error::InvalidParameter(format!(
            "W integral needs t1 <= t2, got {t1} > {t2}"
        )));
    }
    let sb = b.sqrt();
    let shift = a / (2.0 * b);
    let k2 = fresnel_k(2.0 * sb * (t2 + shift));
    let k1 = fresnel_k(2.0 * sb * (t1 + shift));
    let phase = Complex64::cis(-TAU * a * a / (4.0 * b));
    Ok(phase * (k2 - k1) / (2.0 * sb))
}

/// Fourier transform `X(f; l)` of the unit-amplitude waveform of symbol `l`,
/// as the sum of the two chirp segments before and after the frequency wrap.
pub fn waveform_fourier_transform(p: &LoraParams, l: Symbol, f: f64) -> Complex64 {
    let b = p.bandwidth();
    let m = p.m() as f64;
    let l = l.value() as f64;
    let rate = b * b / (2.0 * m);
    let tau = (m - l) / b;
    let first = w_integral(b * (l / m - 0.5) - f, rate, 0.0, tau).expect("rate > 0");
    let second = w_integral(b * (l / m - 1.5) - f, rate, tau, m / b).expect("rate > 0");
    first + second
}

/// `X(f; l)` for every symbol `l` at one frequency.
///
/// Both segments of every waveform share Fresnel arguments on the lattice
/// `sqrt(2/M) (j - f Ts)`, so only `M + 1` Fresnel evaluations are needed.
pub fn fourier_transforms(p: &LoraParams, f: f64) -> Vec<Complex64> {
    let m = p.m();
    let nu = f * p.symbol_duration();
    let half = (m / 2) as f64;
    let scale = (m as f64 / 2.0).sqrt();
    let k_at = |d: f64| fresnel_k(scale.recip() * d);
    let k_top = k_at(half - nu);
    let wrap = Complex64::cis(-TAU * nu);
    let norm = scale / p.bandwidth();
    (0..m)
        .map(|l| {
            let d = l as f64 - half - nu;
            let k_l = k_at(d);
            let phase = Complex64::cis(-PI * d * d / m as f64);
            let k_bot = if l == 0 { k_l } else { k_at(-half - nu) };
            phase * (k_top - k_l + wrap * (k_l - k_bot)) * norm
        })
        .collect()
}

/// Sums `sum_l |X|^2` and `sum_l X` on a uniform grid `f_i = (nu0 + i / k) B / M`.
///
/// Grid points that share the fractional offset `i mod k` use Fresnel values
/// and phases tabulated once on an integer lattice.
fn uniform_sums(p: &LoraParams, nu0: f64, k: usize, count: usize) -> Vec<(f64, Complex64)> {
    let m = p.m() as i64;
    let half = m / 2;
    let inv_scale = (2.0 / m as f64).sqrt();
    let norm = (m as f64 / 2.0).sqrt() / p.bandwidth();
    if count == 0 {
        return Vec::new();
    }
    let q_max = ((count - 1) / k) as i64;
    // lattice index j runs over [-half - q_max, half]
    let j_min = -half - q_max;
    let j_len = (half - j_min + 1) as usize;

    let per_residue: Vec<Vec<(usize, (f64, Complex64))>> = (0..k.min(count))
        .into_par_iter()
        .map(|r| {
            let phi = nu0 + r as f64 / k as f64;
            let table: Vec<(Complex64, Complex64)> = (0..j_len)
                .map(|idx| {
                    let d = (j_min + idx as i64) as f64 - phi;
                    (
                        fresnel_k(inv_scale * d),
                        Complex64::cis(-PI * (d * d / m as f64).rem_euclid(2.0)),
                    )
                })
                .collect();
            let mut out = Vec::new();
            let mut i = r;
            while i < count {
                let q = (i / k) as i64;
                let nu = phi + q as f64;
                let wrap = Complex64::cis(-TAU * nu.rem_euclid(1.0));
                let at = |j: i64| table[(j - j_min) as usize];
                let k_top = at(half - q).0;
                let k_bot = at(-half - q).0;
                let mut s2 = 0.0;
                let mut s1 = Complex64::new(0.0, 0.0);
                for l in 0..m {
                    let (k_l, phase) = at(l - half - q);
                    let x = phase * (k_top - k_l + wrap * (k_l - k_bot));
                    s2 += x.norm_sqr();
                    s1 += x;
                }
                out.push((i, (s2 * norm * norm, s1 * norm)));
                i += k;
            }
            out
        })
        .collect();

    let mut sums = vec![(0.0, Complex64::new(0.0, 0.0)); count];
    for (i, v) in per_residue.into_iter().flatten() {
        sums[i] = v;
    }
    sums
}

fn continuous_from_sums(p: &LoraParams, s2: f64, s1: Complex64) -> f64 {
    let m = p.m() as f64;
    ((s2 - s1.norm_sqr() / m) / (p.symbol_duration() * m)).max(0.0)
}

fn line_from_sum(p: &LoraParams, s1: Complex64) -> f64 {
    let m = p.m() as f64;
    let ts = p.symbol_duration();
    s1.norm_sqr() / (ts * ts * m * m)
}

/// `(Gc, |sum_l X|^2 / (Ts M)^2)` on the uniform grid `f_i = (nu0 + i / k) B / M`.
/// The second entry is a line power wherever `f_i` is a multiple of `B / M`.
pub(crate) fn uniform_components(
    p: &LoraParams,
    nu0: f64,
    k: usize,
    count: usize,
) -> Vec<(f64, f64)> {
    uniform_sums(p, nu0, k, count)
        .into_iter()
        .map(|(s2, s1)| (continuous_from_sums(p, s2, s1), line_from_sum(p, s1)))
        .collect()
}

/// Continuous PSD `Gc(f)` (1/Hz, unit signal power) at arbitrary frequencies.
pub fn continuous_psd(p: &LoraParams, grid: &[f64]) -> Vec<f64> {
    grid.par_iter()
        .map(|&f| {
            let xs = fourier_transforms(p, f);
            let s2 = xs.iter().map(|x| x.norm_sqr()).sum();
            let s1 = xs.iter().sum();
            continuous_from_sums(p, s2, s1)
        })
        .collect()
}

/// Continuous PSD on the uniform grid `f_i = (nu0 + i / k) B / M`, `i < count`.
pub fn continuous_psd_uniform(p: &LoraParams, nu0: f64, k: usize, count: usize) -> Vec<f64> {
    assert!(k >= 1);
    uniform_sums(p, nu0, k, count)
        .into_iter()
        .map(|(s2, s1)| continuous_from_sums(p, s2, s1))
        .collect()
}

/// One Dirac component of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub freq_hz: f64,
    /// Fraction of the total signal power carried by the line.
    pub power: f64,
}

/// Spectral lines at `n B / M` for `-n_max <= n <= n_max`.
pub fn discrete_spectrum_lines(p: &LoraParams, n_max: usize) -> Result<Vec<SpectralLine>> {
    if n_max < p.m() {
        return Err(Error::InvalidParameter(format!(
            "n_max must be at least M = {}, got {n_max}",
            p.m()
        )));
    }
    let spacing = p.bandwidth() / p.m() as f64;
    let sums = uniform_sums(p, -(n_max as f64), 1, 2 * n_max + 1);
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(i, (_, s1))| SpectralLine {
            freq_hz: (i as f64 - n_max as f64) * spacing,
            power: line_from_sum(p, s1),
        })
        .collect())
}

/// Continuous PSD samples plus the line spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Ascending baseband frequencies in Hz.
    pub grid: Vec<f64>,
    /// `Gc` at each grid point, 1/Hz for unit signal power.
    pub continuous: Vec<f64>,
    pub lines: Vec<SpectralLine>,
    /// Modulation parameters, when the spectrum was computed rather than loaded.
    pub params: Option<LoraParams>,
}

impl SpectrumResult {
    /// Closed-form spectrum on a symmetric grid with `per_line` points per
    /// line spacing `B / M`, covering at least `|f| <= half_span_hz`.
    /// Lines are listed for `|n| <= max(4M, half_span / (B/M))`.
    pub fn fresnel(p: &LoraParams, per_line: usize, half_span_hz: f64) -> Result<Self> {
        if per_line == 0 || half_span_hz.is_nan() || half_span_hz <= 0.0 {
            return Err(Error::InvalidParameter(
                "grid density and span must be positive".into(),
            ));
        }
        let spacing = p.bandwidth() / p.m() as f64;
        let half_points = (half_span_hz / spacing * per_line as f64).ceil() as usize;
        let nu0 = -(half_points as f64) / per_line as f64;
        let count = 2 * half_points + 1;
        let grid = (0..count)
            .map(|i| (i as f64 - half_points as f64) * spacing / per_line as f64)
            .collect();
        let continuous = continuous_psd_uniform(p, nu0, per_line, count);
        let n_max = (4 * p.m()).max((half_span_hz / spacing).ceil() as usize);
        Ok(SpectrumResult {
            grid,
            continuous,
            lines: discrete_spectrum_lines(p, n_max)?,
            params: Some(*p),
        })
    }

    /// Trapezoidal integral of the continuous part over the grid.
    pub fn continuous_power(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.continuous.windows(2))
            .map(|(f, g)| 0.5 * (f[1] - f[0]) * (g[0] + g[1]))
            .sum()
    }

    pub fn line_power(&self) -> f64 {
        self.lines.iter().map(|l| l.power).sum()
    }

    /// Peak of the continuous part.
    pub fn peak(&self) -> f64 {
        self.continuous.iter().copied().fold(0.0, f64::max)
    }

    /// `10 log10(Gc B)`, the normalized PSD in dB.
    pub fn normalized_db(&self, bandwidth_hz: f64) -> Vec<f64> {
        self.continuous
            .iter()
            .map(|g| 10.0 * (g * bandwidth_hz).log10())
            .collect()
    }
}

/// Power in the line spectrum, three ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretePower {
    /// `1 / M`.
    pub analytic: f64,
    /// Sum of line powers for `|n| <= n_max`.
    pub line_sum: f64,
    pub n_max: usize,
    /// `(1/Ts) int_0^Ts |E[x(t; A)]|^2 dt` by the rectangle rule on a full period.
    pub envelope_quadrature: f64,
}

pub fn discrete_power_total(p: &LoraParams) -> Result<DiscretePower> {
    let m = p.m();
    let n_max = 4 * m;
    let line_sum = discrete_spectrum_lines(p, n_max)?
        .iter()
        .map(|l| l.power)
        .sum();
    Ok(DiscretePower {
        analytic: 1.0 / m as f64,
        line_sum,
        n_max,
        envelope_quadrature: mean_envelope_power(p, 8 * m),
    })
}

/// `(1/Ts) int_0^Ts |E[x(t; A)]|^2 dt` with `points` equispaced samples.
///
/// The integrand is a trigonometric polynomial of degree `M - 1` in
/// `2 pi t / Ts`, so any `points >= M` integrates it exactly.
pub fn mean_envelope_power(p: &LoraParams, points: usize) -> f64 {
    let ts = p.symbol_duration();
    (0..points)
        .map(|i| mean_envelope_magnitude(p, i as f64 * ts / points as f64).powi(2))
        .sum::<f64>()
        / points as f64
}
