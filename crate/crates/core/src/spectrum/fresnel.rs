//! Fresnel integrals `C(x) = int_0^x cos(pi t^2 / 2) dt` and
//! `S(x) = int_0^x sin(pi t^2 / 2) dt`.
//!
//! Power series below `SERIES_LIMIT`, and above it the continued fraction
//! for the complementary error function, since
//! `C(x) + j S(x) = (1 + j)/2 erf((sqrt(pi)/2)(1 - j) x)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

const SERIES_LIMIT: f64 = 1.8;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 500;

/// `(C(x), S(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelPair {
    pub c: f64,
    pub s: f64,
}

impl FresnelPair {
    /// `K(x) = C(x) + j S(x)`.
    pub fn k(self) -> Complex64 {
        Complex64::new(self.c, self.s)
    }
}

pub fn fresnel(x: f64) -> FresnelPair {
    let ax = x.abs();
    let (c, s) = if ax < SERIES_LIMIT {
        series(ax)
    } else {
        continued_fraction(ax)
    };
    if x < 0.0 {
        FresnelPair { c: -c, s: -s }
    } else {
        FresnelPair { c, s }
    }
}

/// `K(x) = C(x) + j S(x)`.
pub fn fresnel_k(x: f64) -> Complex64 {
    fresnel(x).k()
}

fn series(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 0.0);
    }
    // sum_k (-1)^.. (pi x^2/2)^k x / (k! (2k+1)); even k feed C, odd k feed S
    let t = FRAC_PI_2 * x * x;
    let mut term = x;
    let mut c = x;
    let mut s = 0.0;
    for k in 1..MAX_ITER {
        term *= t / k as f64;
        let contrib = term / (2 * k + 1) as f64;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            s += sign * contrib;
        } else {
            c += sign * contrib;
        }
        if contrib < EPS * c.abs().max(s.abs()) {
            break;
        }
    }
    (c, s)
}

/// `(cos, sin)` of `pi x^2 / 2`, with `x^2` reduced modulo 4 exactly.
fn half_pi_square_phase(x: f64) -> (f64, f64) {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    let r = hi.rem_euclid(4.0) + lo;
    let (s, c) = (FRAC_PI_2 * r).sin_cos();
    (c, s)
}

fn continued_fraction(x: f64) -> (f64, f64) {
    // Modified Lentz evaluation of the erfc continued fraction.
    let tiny = 1e-300;
    let pix2 = PI * x * x;
    let one = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1.0 / tiny, 0.0);
    let mut d = one / b;
    let mut h = d;
    let mut n = -1.0f64;
    for _ in 2..MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = one / (d * a + b);
        cc = b + a / cc;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    let (cos, sin) = half_pi_square_phase(x);
    let cs = Complex64::new(0.5, 0.5) * (one - Complex64::new(cos, sin) * h);
    (cs.re, cs.im)
}
