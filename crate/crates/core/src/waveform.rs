//! Continuous-time LoRa waveforms.
//!
//! Within one symbol interval `[0, Ts)` the instantaneous frequency of symbol
//! `a` starts at `a B / M`, rises linearly at rate `B / Ts` and wraps down by
//! `B` at `tau_a = Ts (1 - a / M)`. The resulting phase returns to zero
//! (mod 2 pi) at the end of every symbol, so a stream is phase continuous
//! without carrying state from one symbol to the next.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{turns_to_radians, LoraParams, Symbol};

/// Uniformly sampled complex baseband signal.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBuffer {
    pub samples: Vec<Complex64>,
    /// Sample rate in Hz.
    pub fs: f64,
    /// Time of the first sample in seconds.
    pub t0: f64,
}

impl IqBuffer {
    pub fn new(samples: Vec<Complex64>, fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample rate must be positive, got {fs}"
            )));
        }
        Ok(IqBuffer {
            samples,
            fs,
            t0: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of `|x|^2` over the buffer.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

/// Right-continuous unit step, `u(0) = 1`.
fn step(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Time `tau_a` at which the frequency of symbol `a` wraps from `B` down to `0`.
pub fn wrap_time(p: &LoraParams, a: Symbol) -> f64 {
    p.symbol_duration() * (1.0 - a.value() as f64 / p.m() as f64)
}

/// Instantaneous frequency `f(t; a)` in Hz for `0 <= t < Ts`, in `[0, B)`.
pub fn instantaneous_frequency(p: &LoraParams, a: Symbol, t: f64) -> Result<f64> {
    let ts = p.symbol_duration();
    if !(0.0..ts).contains(&t) {
        return Err(Error::TimeOutOfRange { t, ts, close: ')' });
    }
    let b = p.bandwidth();
    let m = p.m() as f64;
    Ok(a.value() as f64 * b / m + b / ts * t - b * step(t - wrap_time(p, a)))
}

/// Phase `phi(t; a)` in radians for `0 <= t <= Ts`, not reduced modulo 2 pi.
pub fn phase(p: &LoraParams, a: Symbol, t: f64) -> Result<f64> {
    let ts = p.symbol_duration();
    if !(0.0..=ts).contains(&t) {
        return Err(Error::TimeOutOfRange { t, ts, close: ']' });
    }
    let b = p.bandwidth();
    let m = p.m() as f64;
    let tau = wrap_time(p, a);
    let turns =
        a.value() as f64 * b * t / m + b * t * t / (2.0 * ts) - b * (t - tau) * step(t - tau);
    Ok(TAU * turns)
}

/// Complex envelope of one symbol, centred at zero frequency, sampled
/// `oversample` times per chip over `[0, Ts)`.
///
/// Samples are `gamma exp{j 2 pi B t [a/M - 1/2 + B t / (2M) - u(t - (M-a)/B)]}`
/// at `t = k Ts / (oversample M)`.
pub fn baseband_waveform(p: &LoraParams, a: Symbol, oversample: usize) -> Result<IqBuffer> {
    if oversample == 0 {
        return Err(Error::InvalidParameter("oversample must be >= 1".into()));
    }
    let mut samples = Vec::with_capacity(oversample * p.m());
    push_symbol(p, a, oversample, &mut samples);
    IqBuffer::new(samples, oversample as f64 * p.bandwidth())
}

fn push_symbol(p: &LoraParams, a: Symbol, oversample: usize, out: &mut Vec<Complex64>) {
    let m = p.m() as i128;
    let os = oversample as i128;
    let a = a.value() as i128;
    let gamma = p.amplitude();
    // Phase in turns is num / den with den = 2 M os^2; integer arithmetic
    // keeps the reduction exact for every spreading factor.
    let den = 2 * m * os * os;
    let wrap_index = os * (m - a);
    for k in 0..(os * m) {
        let mut num = 2 * k * os * a - k * os * m + k * k;
        if k >= wrap_index {
            num -= 2 * m * os * k;
        }
        out.push(Complex64::from_polar(gamma, turns_to_radians(num, den)));
    }
}

/// Modulate a symbol sequence into a phase-continuous baseband stream.
pub fn modulate(p: &LoraParams, symbols: &[Symbol], oversample: usize) -> Result<IqBuffer> {
    if symbols.is_empty() {
        return Err(Error::Empty("symbol sequence"));
    }
    if oversample == 0 {
        return Err(Error::InvalidParameter("oversample must be >= 1".into()));
    }
    let mut samples = Vec::with_capacity(symbols.len() * oversample * p.m());
    for &a in symbols {
        push_symbol(p, a, oversample, &mut samples);
    }
    IqBuffer::new(samples, oversample as f64 * p.bandwidth())
}

/// Evaluate the unit-amplitude complex envelope `x(t; a)` at an arbitrary
/// time in `[0, Ts]` (the value at `Ts` is the left limit).
pub fn envelope_at(p: &LoraParams, a: Symbol, t: f64) -> Complex64 {
    let b = p.bandwidth();
    let m = p.m() as f64;
    let bt = b * t;
    let wrap = if bt >= m - a.value() as f64 { 1.0 } else { 0.0 };
    let turns = bt * (a.value() as f64 / m - 0.5 + bt / (2.0 * m) - wrap);
    Complex64::cis(TAU * turns.rem_euclid(1.0))
}

/// Mean waveform `E[x(t; A)]` over equiprobable symbols, by direct averaging.
pub fn mean_waveform(p: &LoraParams, t: f64) -> Complex64 {
    let m = p.m();
    let sum: Complex64 = (0..m as u32)
        .map(|a| envelope_at(p, Symbol::new(a, p).expect("in range"), t))
        .sum();
    sum / m as f64
}

/// `|E[x(t; A)]| = (1/M) |sin(pi B t) / sin(pi B t / M)|` for `0 <= t < Ts`.
pub fn mean_envelope_magnitude(p: &LoraParams, t: f64) -> f64 {
    let m = p.m() as f64;
    let x = PI * p.bandwidth() * t;
    let den = (x / m).sin();
    if den.abs() < 1e-12 {
        // Dirichlet-kernel limit via L'Hopital.
        return (x.cos() / (x / m).cos()).abs();
    }
    (x.sin() / den).abs() / m
}
