//! Modulation configuration and symbol alphabet.

use crate::error::{Error, Result};

/// Largest supported spreading factor.
pub const MAX_SF: u32 = 16;

/// LoRa modulation parameters.
///
/// The alphabet size is `M = 2^SF` and the symbol duration is derived as
/// `Ts = M / B`, so `B * Ts == M` by construction. The passband power `Ps`
/// sets the complex-envelope amplitude `gamma = sqrt(2 Ps)`; the default
/// `Ps = 0.5 W` gives `gamma = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoraParams {
    sf: u32,
    bandwidth_hz: f64,
    carrier_hz: f64,
    power_w: f64,
}

impl LoraParams {
    pub fn new(sf: u32, bandwidth_hz: f64) -> Result<Self> {
        if !(1..=MAX_SF).contains(&sf) {
            return Err(Error::InvalidParameter(format!(
                "spreading factor {sf} outside [1, {MAX_SF}]"
            )));
        }
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive and finite, got {bandwidth_hz}"
            )));
        }
        Ok(LoraParams {
            sf,
            bandwidth_hz,
            carrier_hz: 0.0,
            power_w: 0.5,
        })
    }

    pub fn with_carrier(mut self, carrier_hz: f64) -> Result<Self> {
        if !(carrier_hz.is_finite() && carrier_hz >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be non-negative, got {carrier_hz}"
            )));
        }
        self.carrier_hz = carrier_hz;
        Ok(self)
    }

    pub fn with_power_watts(mut self, power_w: f64) -> Result<Self> {
        if !(power_w.is_finite() && power_w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "passband power must be positive, got {power_w}"
            )));
        }
        self.power_w = power_w;
        Ok(self)
    }

    pub fn sf(&self) -> u32 {
        self.sf
    }

    /// Alphabet size `M = 2^SF`.
    pub fn m(&self) -> usize {
        1usize << self.sf
    }

    /// Frequency deviation `B` in Hz (also the chip rate).
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth_hz
    }

    /// Symbol duration `Ts = M / B`.
    pub fn symbol_duration(&self) -> f64 {
        self.m() as f64 / self.bandwidth_hz
    }

    /// Chip duration `Tc = 1 / B`.
    pub fn chip_duration(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    pub fn carrier(&self) -> f64 {
        self.carrier_hz
    }

    pub fn power_watts(&self) -> f64 {
        self.power_w
    }

    /// Complex-envelope amplitude `gamma = sqrt(2 Ps)`.
    pub fn amplitude(&self) -> f64 {
        (2.0 * self.power_w).sqrt()
    }

    pub fn symbol(&self, value: u32) -> Result<Symbol> {
        Symbol::new(value, self)
    }
}

/// A modulation symbol `a` in `[0, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u32);

impl Symbol {
    pub fn new(value: u32, params: &LoraParams) -> Result<Self> {
        if (value as usize) < params.m() {
            Ok(Symbol(value))
        } else {
            Err(Error::SymbolOutOfRange {
                value,
                m: params.m(),
            })
        }
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

impl From<Symbol> for u32 {
    fn from(s: Symbol) -> u32 {
        s.0
    }
}

/// Wrap an integer phase numerator `num / den` (in turns) into radians in `(-pi, pi]`.
///
/// Reducing exactly in integers keeps long chirps free of accumulated rounding.
pub(crate) fn turns_to_radians(num: i128, den: i128) -> f64 {
    let r = num.rem_euclid(den);
    let r = if 2 * r > den { r - den } else { r };
    std::f64::consts::TAU * (r as f64 / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let p = LoraParams::new(7, 125e3).unwrap();
        assert_eq!(p.m(), 128);
        assert_eq!(p.symbol_duration() * p.bandwidth(), 128.0);
        assert_eq!(p.amplitude(), 1.0);
        assert_eq!(p.chip_duration(), 8e-6);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(LoraParams::new(0, 1.0).is_err());
        assert!(LoraParams::new(17, 1.0).is_err());
        assert!(LoraParams::new(7, 0.0).is_err());
        assert!(LoraParams::new(7, f64::NAN).is_err());
        let p = LoraParams::new(3, 8.0).unwrap();
        assert!(p.with_carrier(-1.0).is_err());
        assert!(p.with_power_watts(0.0).is_err());
        assert!(p.symbol(8).is_err());
        assert_eq!(p.symbol(7).unwrap().value(), 7);
    }

    #[test]
    fn turns_reduction() {
        assert_eq!(turns_to_radians(0, 16), 0.0);
        assert!((turns_to_radians(5, 4) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((turns_to_radians(-1, 4) + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
