//! Chip-rate receiver: sampling, dechirping and DFT demodulation.
//!
//! Sampling one symbol at the chip rate `B` gives `M` samples
//! `x_k = exp{j 2 pi k (a/M - 1/2 + k/(2M))}` in which the frequency wrap
//! disappears (it contributes whole turns). Multiplying by the conjugate
//! reference chirp leaves a pure tone at DFT bin `a`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::params::{turns_to_radians, LoraParams, Symbol};
use crate::waveform::IqBuffer;

/// One symbol sampled at the chip rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipVector {
    pub chips: Vec<Complex64>,
    pub params: LoraParams,
}

impl ChipVector {
    pub fn new(params: LoraParams, chips: Vec<Complex64>) -> Result<Self> {
        if chips.len() != params.m() {
            return Err(Error::LengthMismatch {
                expected: params.m(),
                actual: chips.len(),
            });
        }
        Ok(ChipVector { chips, params })
    }
}

/// Dechirped symbol vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DechirpedVector {
    pub values: Vec<Complex64>,
}

/// Chip-rate samples of symbol `a`, scaled by the envelope amplitude.
pub fn chip_samples(p: &LoraParams, a: Symbol) -> ChipVector {
    let m = p.m() as i128;
    let a = a.value() as i128;
    let gamma = p.amplitude();
    let chips = (0..m)
        .map(|k| Complex64::from_polar(gamma, turns_to_radians(2 * k * a - k * m + k * k, 2 * m)))
        .collect();
    ChipVector { chips, params: *p }
}

/// Multiply by `exp{-j 2 pi k^2 / (2M) + j pi k}`.
pub fn dechirp(c: &ChipVector) -> Result<DechirpedVector> {
    let m = c.params.m();
    if c.chips.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: c.chips.len(),
        });
    }
    let m = m as i128;
    let values = c
        .chips
        .iter()
        .zip(0i128..)
        .map(|(x, k)| x * Complex64::cis(turns_to_radians(k * m - k * k, 2 * m)))
        .collect();
    Ok(DechirpedVector { values })
}

/// DFT demodulator with a cached FFT plan.
pub struct Demodulator {
    params: LoraParams,
    fft: Arc<dyn Fft<f64>>,
}

impl Demodulator {
    pub fn new(params: LoraParams) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(params.m());
        Demodulator { params, fft }
    }

    /// `X_q = sum_k x~_k exp(-j 2 pi k q / M)` of the dechirped vector.
    pub fn spectrum(&self, c: &ChipVector) -> Result<Vec<Complex64>> {
        let mut buf = dechirp(c)?.values;
        self.fft.process(&mut buf);
        Ok(buf)
    }

    /// Index of the largest DFT magnitude; ties go to the lowest index.
    pub fn demodulate(&self, c: &ChipVector) -> Result<Symbol> {
        let spec = self.spectrum(c)?;
        let mut best = 0;
        let mut best_mag = f64::NEG_INFINITY;
        for (q, v) in spec.iter().enumerate() {
            let mag = v.norm_sqr();
            if mag > best_mag {
                best_mag = mag;
                best = q;
            }
        }
        Symbol::new(best as u32, &self.params)
    }

    /// Split a buffer into symbols and demodulate each one.
    ///
    /// A buffer sampled at an integer multiple of the chip rate is decimated
    /// by keeping every `fs / B`-th sample starting at index 0, without
    /// filtering.
    pub fn demodulate_stream(&self, iq: &IqBuffer) -> Result<Vec<Symbol>> {
        if iq.is_empty() {
            return Err(Error::Empty("IQ buffer"));
        }
        let b = self.params.bandwidth();
        let ratio = iq.fs / b;
        let factor = ratio.round();
        if factor < 1.0 || (ratio - factor).abs() > 1e-9 * ratio {
            return Err(Error::SampleRateMismatch {
                fs: iq.fs,
                chip_rate: b,
            });
        }
        let factor = factor as usize;
        let m = self.params.m();
        let per_symbol = m * factor;
        let trailing = iq.len() % per_symbol;
        if trailing != 0 {
            return Err(Error::TrailingSamples {
                samples: iq.len(),
                per_symbol,
                trailing,
            });
        }
        iq.samples
            .chunks(per_symbol)
            .map(|block| {
                let chips = block.iter().step_by(factor).copied().collect();
                self.demodulate(&ChipVector::new(self.params, chips)?)
            })
            .collect()
    }
}

/// Demodulate one chip vector (plans a fresh FFT).
pub fn demodulate_symbol(c: &ChipVector) -> Result<Symbol> {
    Demodulator::new(c.params).demodulate(c)
}

pub fn demodulate_stream(iq: &IqBuffer, p: &LoraParams) -> Result<Vec<Symbol>> {
    Demodulator::new(*p).demodulate_stream(iq)
}

/// Add circularly-symmetric complex white Gaussian noise.
///
/// The per-sample noise variance is `P / 10^(snr_db / 10)` where `P` is the
/// mean power of the input (`gamma^2` for a synthesized LoRa signal). Noise
/// comes from a ChaCha8 generator seeded with `seed`, with normal variates
/// drawn by `rand_distr::Normal`; the same seed always yields the same output.
pub fn awgn(iq: &IqBuffer, snr_db: f64, seed: u64) -> Result<IqBuffer> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "SNR must be finite, got {snr_db}"
        )));
    }
    let variance = iq.mean_power() / 10f64.powf(snr_db / 10.0);
    let normal = Normal::new(0.0, (variance / 2.0).sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = iq
        .samples
        .iter()
        .map(|x| x + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    Ok(IqBuffer {
        samples,
        fs: iq.fs,
        t0: iq.t0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{baseband_waveform, modulate};

    fn syms(p: &LoraParams, v: &[u32]) -> Vec<Symbol> {
        v.iter().map(|&x| p.symbol(x).unwrap()).collect()
    }

    #[test]
    fn first_chip_is_one() {
        let p = LoraParams::new(6, 125e3).unwrap();
        for a in 0..64 {
            assert_eq!(
                chip_samples(&p, p.symbol(a).unwrap()).chips[0],
                Complex64::new(1.0, 0.0)
            );
        }
    }

    #[test]
    fn chips_equal_unit_oversampled_waveform() {
        let p = LoraParams::new(8, 125e3).unwrap();
        for a in [0, 1, 77, 255] {
            let a = p.symbol(a).unwrap();
            let w = baseband_waveform(&p, a, 1).unwrap();
            let c = chip_samples(&p, a);
            for (x, y) in w.samples.iter().zip(&c.chips) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dechirp_gives_tone() {
        let p = LoraParams::new(5, 1.0).unwrap();
        let zero = dechirp(&chip_samples(&p, p.symbol(0).unwrap())).unwrap();
        for v in &zero.values {
            assert!((v - 1.0).norm() < 1e-12);
        }
        let a = 11;
        let d = dechirp(&chip_samples(&p, p.symbol(a).unwrap())).unwrap();
        let expect = Complex64::cis(std::f64::consts::TAU * a as f64 / 32.0);
        assert!((d.values[1] - expect).norm() < 1e-12);
        for v in &d.values {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dechirp_length_mismatch() {
        let p = LoraParams::new(4, 1.0).unwrap();
        assert!(ChipVector::new(p, vec![Complex64::new(1.0, 0.0); 15]).is_err());
        let bad = ChipVector {
            chips: vec![Complex64::new(1.0, 0.0); 3],
            params: p,
        };
        assert!(matches!(dechirp(&bad), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn demodulates_clean_and_scaled() {
        let p = LoraParams::new(7, 125e3).unwrap();
        let c = chip_samples(&p, p.symbol(5).unwrap());
        assert_eq!(demodulate_symbol(&c).unwrap().value(), 5);
        let scaled = ChipVector::new(p, c.chips.iter().map(|x| x * 3.7).collect()).unwrap();
        assert_eq!(demodulate_symbol(&scaled).unwrap().value(), 5);
    }

    #[test]
    fn stream_roundtrip_and_decimation() {
        let p = LoraParams::new(4, 1e3).unwrap();
        let s = syms(&p, &[3, 1, 4]);
        assert_eq!(
            demodulate_stream(&modulate(&p, &s, 1).unwrap(), &p).unwrap(),
            s
        );
        assert_eq!(
            demodulate_stream(&modulate(&p, &s, 4).unwrap(), &p).unwrap(),
            s
        );
    }

    #[test]
    fn stream_errors() {
        let p = LoraParams::new(4, 1e3).unwrap();
        let empty = IqBuffer::new(vec![], 1e3).unwrap();
        assert!(matches!(
            demodulate_stream(&empty, &p),
            Err(Error::Empty(_))
        ));
        let mut buf = modulate(&p, &syms(&p, &[1, 2]), 1).unwrap();
        buf.samples.pop();
        match demodulate_stream(&buf, &p) {
            Err(Error::TrailingSamples { trailing, .. }) => assert_eq!(trailing, 15),
            other => panic!("{other:?}"),
        }
        let odd = IqBuffer::new(vec![Complex64::new(1.0, 0.0); 16], 1.5e3).unwrap();
        assert!(matches!(
            demodulate_stream(&odd, &p),
            Err(Error::SampleRateMismatch { .. })
        ));
    }

    #[test]
    fn awgn_is_deterministic_and_transparent_at_high_snr() {
        let p = LoraParams::new(5, 1e3).unwrap();
        let x = modulate(&p, &syms(&p, &[1, 30, 7]), 2).unwrap();
        assert_eq!(awgn(&x, 10.0, 42).unwrap(), awgn(&x, 10.0, 42).unwrap());
        assert_ne!(awgn(&x, 10.0, 42).unwrap(), awgn(&x, 10.0, 43).unwrap());
        let y = awgn(&x, 200.0, 1).unwrap();
        for (a, b) in x.samples.iter().zip(&y.samples) {
            assert!((a - b).norm() < 1e-8);
        }
        assert!(awgn(&x, f64::INFINITY, 1).is_err());
    }

    #[test]
    fn awgn_power() {
        let x = IqBuffer::new(vec![Complex64::new(1.0, 0.0); 1_000_000], 1.0).unwrap();
        let snr_db = 3.0;
        let y = awgn(&x, snr_db, 7).unwrap();
        let noise: f64 = x
            .samples
            .iter()
            .zip(&y.samples)
            .map(|(a, b)| (b - a).norm_sqr())
            .sum::<f64>()
            / x.len() as f64;
        let nominal = 10f64.powf(-snr_db / 10.0);
        assert!((noise / nominal - 1.0).abs() < 0.01, "{noise} vs {nominal}");
    }
}
