//! PSD from sampled waveforms and zero-padded FFTs.
//!
//! Each `X(f; l)` is approximated by the trapezoid rule on `N` samples per
//! symbol, evaluated on the grid `i / (k Ts)` with an FFT of length `k N`.
//! Sample instants include every chip boundary (and hence every frequency
//! wrap), so the error expands in even powers of `1/N`; Richardson
//! extrapolation with `N` and `2N` removes the leading term.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{continuous_from_sums, line_from_sum, SpectralLine, SpectrumResult};
use crate::error::{Error, Result};
use crate::params::LoraParams;
use crate::waveform::baseband_waveform;

/// Settings for [`psd_via_dft`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DftConfig {
    /// Samples per symbol; a multiple of `M`, at least `8M`.
    pub samples_per_symbol: usize,
    /// Grid points per line spacing `B / M`.
    pub zero_pad: usize,
    /// Combine `N` and `2N` sample transforms as `(4 X_2N - X_N) / 3`.
    pub extrapolate: bool,
}

impl DftConfig {
    /// `N = 16M`, `k = 8`, with extrapolation.
    pub fn new(p: &LoraParams) -> Self {
        DftConfig {
            samples_per_symbol: 16 * p.m(),
            zero_pad: 8,
            extrapolate: true,
        }
    }
}

/// Per-symbol transforms at `i / (k Ts)` for `|i| < k N / 2`, in grid order.
struct Transformer {
    m: usize,
    n: usize,
    k: usize,
    params: LoraParams,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    // x(0) = x(Ts) = 1, so the end correction is (e^{-j 2 pi i / k} - 1) / 2
    end_correction: Vec<Complex64>,
}

impl Transformer {
    fn new(p: &LoraParams, n: usize, k: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(k * n);
        Transformer {
            m: p.m(),
            n,
            k,
            params: p.with_power_watts(0.5).expect("valid power"),
            fft,
            end_correction: (0..k)
                .map(|r| 0.5 * (Complex64::cis(-TAU * r as f64 / k as f64) - 1.0))
                .collect(),
        }
    }

    fn half(&self) -> usize {
        self.k * self.n / 2
    }

    fn transform(
        &self,
        l: usize,
        buf: &mut Vec<Complex64>,
        scratch: &mut Vec<Complex64>,
        out: &mut [Complex64],
    ) {
        let symbol = self.params.symbol(l as u32).expect("l < M");
        let x = baseband_waveform(&self.params, symbol, self.n / self.m)
            .expect("oversample >= 1")
            .samples;
        let len = self.k * self.n;
        buf.clear();
        buf.extend_from_slice(&x);
        buf.resize(len, Complex64::new(0.0, 0.0));
        scratch.resize(self.fft.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
        self.fft.process_with_scratch(buf, scratch);
        let dt = self.params.symbol_duration() / self.n as f64;
        let half = self.half() as i64;
        for (slot, i) in out.iter_mut().zip(-half + 1..half) {
            let corr = self.end_correction[i.rem_euclid(self.k as i64) as usize];
            *slot = dt * (buf[i.rem_euclid(len as i64) as usize] + corr);
        }
    }
}

struct Work {
    acc: (Vec<f64>, Vec<Complex64>),
    x: Vec<Complex64>,
    xf: Option<Vec<Complex64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// PSD on the grid `i B / (k M)`, `|i| < k N / 2`, with lines at `n B / M`, `|n| < N / 2`.
pub fn psd_via_dft(p: &LoraParams, cfg: &DftConfig) -> Result<SpectrumResult> {
    let m = p.m();
    let n = cfg.samples_per_symbol;
    let k = cfg.zero_pad;
    if n < 8 * m || !n.is_multiple_of(m) {
        return Err(Error::InvalidParameter(format!(
            "samples per symbol must be a multiple of M = {m} and at least 8M, got {n}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter(
            "zero padding factor must be >= 1".into(),
        ));
    }
    let coarse = Transformer::new(p, n, k);
    let fine = cfg.extrapolate.then(|| Transformer::new(p, 2 * n, k));
    let half = coarse.half();
    let count = 2 * half - 1;

    let zero = || (vec![0.0; count], vec![Complex64::new(0.0, 0.0); count]);
    let (s2, s1) = (0..m)
        .into_par_iter()
        .fold(
            || Work {
                acc: zero(),
                x: vec![Complex64::new(0.0, 0.0); count],
                xf: fine
                    .as_ref()
                    .map(|t| vec![Complex64::new(0.0, 0.0); 2 * t.half() - 1]),
                buf: Vec::new(),
                scratch: Vec::new(),
            },
            |mut w, l| {
                let Work {
                    acc,
                    x,
                    xf,
                    buf,
                    scratch,
                } = &mut w;
                coarse.transform(l, buf, scratch, x);
                if let (Some(t), Some(fine_x)) = (fine.as_ref(), xf.as_mut()) {
                    t.transform(l, buf, scratch, fine_x);
                    let offset = t.half() - half;
                    for (j, v) in x.iter_mut().enumerate() {
                        *v = (4.0 * fine_x[offset + j] - *v) / 3.0;
                    }
                }
                for (j, v) in x.iter().enumerate() {
                    acc.0[j] += v.norm_sqr();
                    acc.1[j] += v;
                }
                w
            },
        )
        .map(|w| w.acc)
        .reduce(zero, |mut a, b| {
            for j in 0..count {
                a.0[j] += b.0[j];
                a.1[j] += b.1[j];
            }
            a
        });

    let spacing = p.bandwidth() / (k * m) as f64;
    let grid = (0..count)
        .map(|j| (j as f64 - (half - 1) as f64) * spacing)
        .collect();
    let continuous = s2
        .iter()
        .zip(&s1)
        .map(|(&a, &b)| continuous_from_sums(p, a, b))
        .collect();
    let lines = (0..count)
        .filter(|j| (*j as i64 - (half as i64 - 1)).rem_euclid(k as i64) == 0)
        .map(|j| SpectralLine {
            freq_hz: (j as f64 - (half - 1) as f64) * spacing,
            power: line_from_sum(p, s1[j]),
        })
        .collect();
    Ok(SpectrumResult {
        grid,
        continuous,
        lines,
        params: Some(*p),
    })
}
