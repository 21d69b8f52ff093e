use lora_core::params::{LoraParams, Symbol};
use lora_core::receiver::{awgn, chip_samples, dechirp, demodulate_stream, Demodulator};
use lora_core::waveform::{baseband_waveform, instantaneous_frequency, modulate, phase};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(sf: u32) -> LoraParams {
    LoraParams::new(sf, 125e3).unwrap()
}

fn symbols(p: &LoraParams, values: &[u32]) -> Vec<Symbol> {
    values
        .iter()
        .map(|&v| Symbol::new(v % p.m() as u32, p).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Each symbol interval depends only on its own symbol.
    #[test]
    fn stream_is_memoryless(sf in 3u32..10, values in prop::collection::vec(any::<u32>(), 1..12), os in 1usize..5) {
        let p = params(sf);
        let syms = symbols(&p, &values);
        let stream = modulate(&p, &syms, os).unwrap();
        let per = os * p.m();
        for (i, &s) in syms.iter().enumerate() {
            let alone = baseband_waveform(&p, s, os).unwrap();
            prop_assert_eq!(&stream.samples[i * per..(i + 1) * per], &alone.samples[..]);
        }
    }

    #[test]
    fn envelope_is_constant(sf in 3u32..12, value in any::<u32>(), power in 0.01f64..10.0) {
        let p = params(sf).with_power_watts(power).unwrap();
        let s = Symbol::new(value % p.m() as u32, &p).unwrap();
        let x = baseband_waveform(&p, s, 2).unwrap();
        let gamma = (2.0 * power).sqrt();
        for v in &x.samples {
            prop_assert!((v.norm() - gamma).abs() < 1e-12 * gamma);
        }
    }

    #[test]
    fn frequency_stays_in_band(sf in 3u32..12, value in any::<u32>(), frac in 0.0f64..1.0) {
        let p = params(sf);
        let s = Symbol::new(value % p.m() as u32, &p).unwrap();
        let t = frac * p.symbol_duration();
        let f = instantaneous_frequency(&p, s, t).unwrap();
        prop_assert!(f >= 0.0 && f < p.bandwidth());
    }

    #[test]
    fn phase_returns_to_zero(sf in 3u32..13, value in any::<u32>()) {
        let p = params(sf);
        let s = Symbol::new(value % p.m() as u32, &p).unwrap();
        let ph = phase(&p, s, p.symbol_duration()).unwrap();
        let wrapped = ph.rem_euclid(std::f64::consts::TAU);
        prop_assert!(wrapped.min(std::f64::consts::TAU - wrapped) < 1e-9);
    }

    #[test]
    fn noiseless_roundtrip(sf in 3u32..12, values in prop::collection::vec(any::<u32>(), 1..40), os in 1usize..4) {
        let p = params(sf);
        let syms = symbols(&p, &values);
        let iq = modulate(&p, &syms, os).unwrap();
        prop_assert_eq!(demodulate_stream(&iq, &p).unwrap(), syms);
    }

    #[test]
    fn dechirp_gives_a_single_tone(sf in 3u32..11, value in any::<u32>()) {
        let p = params(sf);
        let s = Symbol::new(value % p.m() as u32, &p).unwrap();
        let demod = Demodulator::new(p);
        let spec = demod.spectrum(&chip_samples(&p, s)).unwrap();
        let m = p.m() as f64;
        for (q, v) in spec.iter().enumerate() {
            let expect = if q as u32 == s.value() { m } else { 0.0 };
            prop_assert!((v.norm() - expect).abs() < 1e-9 * m);
        }
        prop_assert_eq!(dechirp(&chip_samples(&p, s)).unwrap().values.len(), p.m());
    }
}

#[test]
fn roundtrip_survives_20_db() {
    let p = params(7);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let values: Vec<u32> = (0..2000).map(|_| rng.random_range(0..128)).collect();
    let syms = symbols(&p, &values);
    let iq = modulate(&p, &syms, 1).unwrap();
    let noisy = awgn(&iq, 20.0, 7).unwrap();
    assert_eq!(demodulate_stream(&noisy, &p).unwrap(), syms);
    // same seed, same noise
    assert_eq!(awgn(&iq, 20.0, 7).unwrap().samples, noisy.samples);
    assert_ne!(awgn(&iq, 20.0, 8).unwrap().samples, noisy.samples);
}
