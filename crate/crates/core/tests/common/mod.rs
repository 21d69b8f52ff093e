//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

/// 10-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Gauss-Legendre integral of `f` over `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// `exp(j pi t^2 / 2)` with `t^2` reduced modulo 4 before scaling.
fn fresnel_integrand(t: f64) -> Complex64 {
    let hi = t * t;
    let lo = t.mul_add(t, -hi);
    Complex64::cis(FRAC_PI_2 * (hi.rem_euclid(4.0) + lo))
}

/// `C(x) + j S(x)` by quadrature of the defining integrals, for ascending
/// non-negative `xs`. Segments end at `sqrt(k)`, where the phase advances by
/// a quarter turn, so each one is integrated to machine precision.
pub fn fresnel_quadrature(xs: &[f64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut k = 0u64;
    for &x in xs {
        assert!(x >= 0.0);
        while ((k + 1) as f64).sqrt() <= x {
            let piece = gauss_legendre(
                &fresnel_integrand,
                (k as f64).sqrt(),
                ((k + 1) as f64).sqrt(),
            );
            // Kahan summation
            let y = piece - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            k += 1;
        }
        out.push(sum + gauss_legendre(&fresnel_integrand, (k as f64).sqrt(), x));
    }
    out
}

/// Asymptotic expansion of `C + j S`, accurate to rounding for `x` near 30 and above.
pub fn fresnel_asymptotic(x: f64) -> Complex64 {
    assert!(x >= 29.0);
    let z = PI * x * x;
    let mut f = 0.0;
    let mut g = 0.0;
    let mut tf = 1.0;
    let mut tg = 1.0 / z;
    for n in 0..8 {
        f += tf;
        g += tg;
        let n = n as f64;
        tf *= -(4.0 * n + 1.0) * (4.0 * n + 3.0) / (z * z);
        tg *= -(4.0 * n + 3.0) * (4.0 * n + 5.0) / (z * z);
    }
    f /= PI * x;
    g /= PI * x;
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    let (s, c) = (FRAC_PI_2 * (hi.rem_euclid(4.0) + lo)).sin_cos();
    Complex64::new(0.5 + f * s - g * c, 0.5 - f * c - g * s)
}

/// `int_t1^t2 exp{j 2 pi (a t + b t^2)} dt` by Gauss-Legendre on segments
/// short enough that the phase moves by at most a quarter turn.
pub fn chirp_integral(a: f64, b: f64, t1: f64, t2: f64) -> Complex64 {
    let max_rate = (a + 2.0 * b * t1).abs().max((a + 2.0 * b * t2).abs());
    let segments = ((max_rate * (t2 - t1) * 4.0).ceil() as usize).max(1) * 2;
    let h = (t2 - t1) / segments as f64;
    let f = |t: f64| Complex64::cis(TAU * (a * t + b * t * t));
    (0..segments)
        .map(|i| gauss_legendre(&f, t1 + i as f64 * h, t1 + (i + 1) as f64 * h))
        .sum()
}

/// Log-spaced points from `lo` to `hi`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Published summary table: `(sf, eff, max |Re C|, B99 / B, Pd, delta_max dB)`.
pub const TABLE_I: [(u32, f64, f64, f64, f64, f64); 5] = [
    (3, 0.375, 0.212, 1.500, 0.125, 1.04),
    (5, 0.156, 0.091, 1.185, 0.03125, 0.41),
    (7, 0.055, 0.045, 1.045, 0.00781, 0.20),
    (10, 0.0098, 0.015, 0.990, 0.00098, 0.07),
    (12, 0.00293, 0.0075, 0.986, 0.00024, 0.03),
];

/// Half a unit in the last printed decimal place of `v` as written in the table.
pub fn print_half_ulp(v: f64) -> f64 {
    let s = format!("{v}");
    let decimals = s.split('.').nth(1).map_or(0, |d| d.len());
    0.5 * 10f64.powi(-(decimals as i32))
}
