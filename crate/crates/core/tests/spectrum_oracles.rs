mod common;

use common::{chirp_integral, fresnel_asymptotic, fresnel_quadrature, log_space};
use lora_core::params::LoraParams;
use lora_core::spectrum::{
    continuous_psd_uniform, discrete_spectrum_lines, fourier_transforms, fresnel, fresnel_k,
    psd_via_dft, w_integral, waveform_fourier_transform, DftConfig, SpectrumResult,
};
use lora_core::waveform::baseband_waveform;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn fresnel_matches_quadrature_on_log_grid() {
    let xs = log_space(1e-3, 1e3, 400);
    let reference = fresnel_quadrature(&xs);
    let mut worst: f64 = 0.0;
    for (x, r) in xs.iter().zip(&reference) {
        let k = fresnel_k(*x);
        worst = worst.max((k.re - r.re).abs()).max((k.im - r.im).abs());
        let neg = fresnel(-x);
        assert_eq!((neg.c, neg.s), (-k.re, -k.im));
    }
    assert!(worst < 1e-9, "worst abs error {worst:e}");
}

#[test]
fn fresnel_matches_asymptotic_expansion() {
    for x in log_space(30.0, 1e4, 300) {
        let k = fresnel_k(x);
        let a = fresnel_asymptotic(x);
        assert!((k - a).norm() < 1e-9, "x={x} {k} {a}");
    }
}

#[test]
fn fresnel_reference_values() {
    let f = fresnel(1.0);
    assert!((f.c - 0.779893).abs() < 1e-6 && (f.s - 0.438259).abs() < 1e-6);
    let q = fresnel_quadrature(&[1.0])[0];
    assert!((q.re - 0.779_893_400_376_822_8).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn w_integral_matches_quadrature(
        a in -50.0f64..50.0,
        b in 0.1f64..40.0,
        t1 in -1.0f64..1.0,
        len in 0.0f64..1.5,
    ) {
        let t2 = t1 + len;
        let w = w_integral(a, b, t1, t2).unwrap();
        let q = chirp_integral(a, b, t1, t2);
        prop_assert!((w - q).norm() < 1e-7, "{w} vs {q}");
    }

    #[test]
    fn batched_transforms_match_segment_formula(sf in 2u32..8, nu in -40.0f64..40.0) {
        let p = LoraParams::new(sf, 125e3).unwrap();
        let f = nu / p.symbol_duration();
        let batch = fourier_transforms(&p, f);
        for (l, x) in batch.iter().enumerate() {
            let direct = waveform_fourier_transform(&p, p.symbol(l as u32).unwrap(), f);
            prop_assert!((x - direct).norm() < 1e-10 * p.symbol_duration());
        }
    }
}

#[test]
fn transform_matches_oversampled_dft() {
    // direct sum of finely sampled waveform at a handful of frequencies
    let p = LoraParams::new(4, 1.0).unwrap();
    let ts = p.symbol_duration();
    let os = 512;
    for l in [0u32, 5, 8, 15] {
        let x = baseband_waveform(&p.with_power_watts(0.5).unwrap(), p.symbol(l).unwrap(), os)
            .unwrap()
            .samples;
        let dt = ts / x.len() as f64;
        for nu in [-3.0, 0.0, 0.5, 2.25, 7.0] {
            let f = nu / ts;
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, v) in x.iter().enumerate() {
                acc += v * Complex64::cis(-std::f64::consts::TAU * f * i as f64 * dt);
            }
            let end = Complex64::cis(-std::f64::consts::TAU * f * ts);
            let dft = dt * (acc + 0.5 * (end - 1.0));
            let exact = waveform_fourier_transform(&p, p.symbol(l).unwrap(), f);
            assert!(
                (dft - exact).norm() < 1e-4 * exact.norm().max(1e-3 * ts),
                "l={l} nu={nu}"
            );
        }
    }
}

#[test]
fn parseval_per_waveform() {
    let p = LoraParams::new(5, 1.0).unwrap();
    let ts = p.symbol_duration();
    let k = 4;
    let half = 64 * p.m() * k;
    let step = 1.0 / (k as f64 * ts);
    let mut energy = vec![0.0; p.m()];
    for i in 0..=2 * half {
        let f = (i as f64 - half as f64) * step;
        let w = if i == 0 || i == 2 * half { 0.5 } else { 1.0 };
        for (e, x) in energy.iter_mut().zip(fourier_transforms(&p, f)) {
            *e += w * step * x.norm_sqr();
        }
    }
    for e in &energy {
        assert!((e / ts - 1.0).abs() < 1e-3, "{e}");
    }
    // different shapes, same energy
    let a = fourier_transforms(&p, 0.3 / ts);
    assert!((a[0].norm() - a[p.m() / 2].norm()).abs() > 1e-3 * ts);
}

#[test]
fn energy_bookkeeping() {
    for sf in [3, 5, 7, 10] {
        let p = LoraParams::new(sf, 125e3).unwrap();
        let s = SpectrumResult::fresnel(&p, 8, 8.0 * 125e3).unwrap();
        let continuous = s.continuous_power();
        let m = p.m() as f64;
        assert!(
            (continuous / (1.0 - 1.0 / m) - 1.0).abs() < 5e-3,
            "sf={sf} {continuous}"
        );
        let total = continuous + s.line_power();
        assert!((total - 1.0).abs() < 5e-3, "sf={sf} total {total}");
        assert!(s.continuous.iter().all(|&g| g >= 0.0));
        for l in &s.lines {
            let n = l.freq_hz / (125e3 / m);
            assert_eq!(n, n.round());
        }
    }
}

#[test]
fn line_totals() {
    for sf in [3, 5, 7, 10] {
        let p = LoraParams::new(sf, 125e3).unwrap();
        let lines = discrete_spectrum_lines(&p, 4 * p.m()).unwrap();
        let total: f64 = lines.iter().map(|l| l.power).sum();
        assert!((total - 1.0 / p.m() as f64).abs() < 1e-4, "sf={sf}");
    }
}

#[test]
fn dft_path_agrees_with_closed_form() {
    let p = LoraParams::new(7, 125e3).unwrap();
    let dft = psd_via_dft(&p, &DftConfig::new(&p)).unwrap();
    let nu0 = dft.grid[0] * p.symbol_duration();
    let exact = continuous_psd_uniform(&p, nu0, 8, dft.grid.len());
    let peak = exact.iter().copied().fold(0.0, f64::max);
    let worst = dft
        .grid
        .iter()
        .zip(dft.continuous.iter().zip(&exact))
        .filter(|(f, _)| f.abs() <= 2.0 * p.bandwidth())
        .map(|(_, (a, b))| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(10.0 * (worst / peak).log10() < -60.0);

    let lines = discrete_spectrum_lines(&p, p.m()).unwrap();
    let zero_exact = lines.iter().find(|l| l.freq_hz == 0.0).unwrap().power;
    let zero_dft = dft.lines.iter().find(|l| l.freq_hz == 0.0).unwrap().power;
    assert!((zero_dft / zero_exact - 1.0).abs() < 1e-6);
}

#[test]
fn dft_grid_spacing() {
    let p = LoraParams::new(4, 125e3).unwrap();
    let cfg = DftConfig {
        samples_per_symbol: 8 * p.m(),
        zero_pad: 1,
        extrapolate: false,
    };
    let s = psd_via_dft(&p, &cfg).unwrap();
    for w in s.grid.windows(2) {
        assert!((w[1] - w[0] - 125e3 / 16.0).abs() < 1e-9);
    }
}
