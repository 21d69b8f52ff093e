use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::IqBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hann,
    Hamming,
    Rectangular,
}

impl Window {
    fn coefficients(self, len: usize) -> Vec<f64> {
        let n = len as f64;
        (0..len)
            .map(|i| {
                let x = TAU * i as f64 / n;
                match self {
                    Window::Hann => 0.5 - 0.5 * x.cos(),
                    Window::Hamming => 0.54 - 0.46 * x.cos(),
                    Window::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

/// Two-sided PSD estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct WelchEstimate {
    /// Ascending frequencies in Hz, from `-fs/2` up to `fs/2 - fs/L`.
    pub freqs: Vec<f64>,
    /// Power per Hz.
    pub psd: Vec<f64>,
    pub segments: usize,
    /// Frequency step `fs / L`.
    pub resolution_hz: f64,
}

impl WelchEstimate {
    /// Power in each frequency cell, `psd * fs / L`.
    pub fn cell_power(&self) -> Vec<f64> {
        self.psd.iter().map(|g| g * self.resolution_hz).collect()
    }
}

/// Averaged windowed periodogram over segments of `segment_len` samples
/// overlapping by the given fraction. The estimate is scaled so that it
/// integrates to the buffer's mean power.
pub fn welch_psd(
    iq: &IqBuffer,
    segment_len: usize,
    overlap: f64,
    window: Window,
) -> Result<WelchEstimate> {
    if segment_len == 0 {
        return Err(Error::InvalidParameter(
            "segment length must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::InvalidParameter(format!(
            "overlap must lie in [0, 1), got {overlap}"
        )));
    }
    if iq.len() < segment_len {
        return Err(Error::InvalidParameter(format!(
            "buffer of {} samples is shorter than one segment of {segment_len}",
            iq.len()
        )));
    }
    let step = (((1.0 - overlap) * segment_len as f64).round() as usize).max(1);
    let starts: Vec<usize> = (0..=(iq.len() - segment_len)).step_by(step).collect();
    let w = window.coefficients(segment_len);
    let fft = FftPlanner::new().plan_fft_forward(segment_len);

    let sum = starts
        .par_iter()
        .fold(
            || (vec![0.0; segment_len], Vec::with_capacity(segment_len)),
            |(mut acc, mut buf): (Vec<f64>, Vec<Complex64>), &s| {
                buf.clear();
                buf.extend(
                    iq.samples[s..s + segment_len]
                        .iter()
                        .zip(&w)
                        .map(|(x, w)| x * w),
                );
                fft.process(&mut buf);
                for (a, x) in acc.iter_mut().zip(&buf) {
                    *a += x.norm_sqr();
                }
                (acc, buf)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(
            || vec![0.0; segment_len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let resolution = iq.fs / segment_len as f64;
    let half = segment_len / 2;
    // reorder to ascending frequency
    let shifted: Vec<f64> = (0..segment_len)
        .map(|i| sum[(i + segment_len - half) % segment_len])
        .collect();
    let raw_power: f64 = shifted.iter().sum::<f64>() * resolution;
    let scale = if raw_power > 0.0 {
        iq.mean_power() / raw_power
    } else {
        0.0
    };
    Ok(WelchEstimate {
        freqs: (0..segment_len)
            .map(|i| (i as f64 - half as f64) * resolution)
            .collect(),
        psd: shifted.iter().map(|v| v * scale).collect(),
        segments: starts.len(),
        resolution_hz: resolution,
    })
}
