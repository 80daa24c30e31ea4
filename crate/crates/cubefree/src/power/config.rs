//! Exponent configuration shared by every run.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Whether the exponent is inside the range the counting asymptotics are
/// stated for, or deliberately outside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// 1 < c < 11/6; the main-term comparisons are meaningful.
    Theorem,
    /// Any c > 0; counts are still exact but main terms are only indicative.
    Exploratory,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Theorem => write!(f, "theorem"),
            Mode::Exploratory => write!(f, "exploratory"),
        }
    }
}

/// The exponent c as an exact rational, its inverse gamma, and the small
/// parameters used by the splits and bound comparisons.
///
/// `gamma * c == 1` exactly, by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentConfig {
    c: Rational,
    gamma: Rational,
    eps: f64,
    eta: f64,
    delta: f64,
    mode: Mode,
    start_bits: u32,
    max_bits: u32,
}

/// Default working precision for enclosure arithmetic.
pub const DEFAULT_START_BITS: u32 = 96;
/// Hard ceiling for precision escalation. Hitting it is an error, never a
/// silent rounding.
pub const DEFAULT_MAX_BITS: u32 = 4096;
/// Desk-scale default for the split parameter eps.
pub const DEFAULT_EPS: f64 = 0.05;

impl ExponentConfig {
    /// Theorem-mode configuration: requires 1 < c < 11/6 exactly.
    pub fn theorem(c: Rational) -> Result<Self> {
        let one = Rational::from_u64(1);
        let upper = Rational::from_ratio_u64(11, 6)?;
        if c <= one || c >= upper {
            return Err(Error::InvalidConfig(format!(
                "theorem mode needs 1 < c < 11/6, got c = {c}"
            )));
        }
        Self::build(c, Mode::Theorem)
    }

    /// Exploratory configuration: any positive c, flagged as such in reports.
    pub fn exploratory(c: Rational) -> Result<Self> {
        if c.is_negative() || c.numer().bits() == 0 {
            return Err(Error::InvalidConfig(format!("c must be positive, got {c}")));
        }
        Self::build(c, Mode::Exploratory)
    }

    /// Parse `c` from a decimal or fraction string and pick the mode from its
    /// value: theorem range if 1 < c < 11/6, exploratory otherwise.
    pub fn from_c_str(s: &str) -> Result<Self> {
        let c = Rational::from_str(s)?;
        let one = Rational::from_u64(1);
        let upper = Rational::from_ratio_u64(11, 6)?;
        if c > one && c < upper {
            Self::theorem(c)
        } else {
            Self::exploratory(c)
        }
    }

    fn build(c: Rational, mode: Mode) -> Result<Self> {
        let gamma = c.recip()?;
        debug_assert!(c.mul(&gamma).is_one());
        let c_f = c.to_f64();
        let eta = DEFAULT_EPS;
        // Fallback power saving: the naturals-case exponent when c is in
        // range, clamped into [eta, 1/2).
        let delta = if c_f > 1.0 && c_f < 2.0 {
            ((3.0 - c_f) / 7.0).clamp(eta, 0.499)
        } else {
            0.2
        };
        Ok(ExponentConfig {
            c,
            gamma,
            eps: DEFAULT_EPS,
            eta,
            delta,
            mode,
            start_bits: DEFAULT_START_BITS,
            max_bits: DEFAULT_MAX_BITS,
        })
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "eps must lie in (0, 0.5), got {eps}"
            )));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "eta must lie in (0, 0.5), got {eta}"
            )));
        }
        self.eta = eta;
        if self.delta < eta {
            self.delta = eta;
        }
        Ok(self)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta >= self.eta && delta < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "delta must lie in [eta, 0.5) = [{}, 0.5), got {delta}",
                self.eta
            )));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_precision(mut self, start_bits: u32, max_bits: u32) -> Result<Self> {
        if start_bits < 16 || max_bits < start_bits {
            return Err(Error::InvalidConfig(format!(
                "need 16 <= start_bits <= max_bits, got {start_bits}..{max_bits}"
            )));
        }
        self.start_bits = start_bits;
        self.max_bits = max_bits;
        Ok(self)
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn start_bits(&self) -> u32 {
        self.start_bits
    }

    pub fn max_bits(&self) -> u32 {
        self.max_bits
    }

    pub fn c_f64(&self) -> f64 {
        self.c.to_f64()
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma.to_f64()
    }

    /// The split cutoff floor(x^eps). A relative nudge of 1e-12 keeps exact
    /// integer powers (x = 1024, eps = 0.1) on the inclusive side.
    pub fn eps_cutoff(&self, x: u64) -> u64 {
        if x == 0 {
            return 0;
        }
        let v = ((x as f64).ln() * self.eps).exp();
        (v * (1.0 + 1e-12)).floor() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_range_enforced() {
        assert!(ExponentConfig::theorem("3/2".parse().unwrap()).is_ok());
        assert!(ExponentConfig::theorem("11/6".parse().unwrap()).is_err());
        assert!(ExponentConfig::theorem("1".parse().unwrap()).is_err());
        assert!(ExponentConfig::theorem("2".parse().unwrap()).is_err());
        // just inside the upper endpoint
        assert!(ExponentConfig::theorem("10993/6000".parse().unwrap()).is_ok());
    }

    #[test]
    fn gamma_is_exact_inverse() {
        let cfg = ExponentConfig::from_c_str("9/5").unwrap();
        assert!(cfg.c().mul(cfg.gamma()).is_one());
        assert_eq!(cfg.mode(), Mode::Theorem);
        let cfg = ExponentConfig::from_c_str("1").unwrap();
        assert_eq!(cfg.mode(), Mode::Exploratory);
    }

    #[test]
    fn eps_cutoff_handles_exact_powers() {
        let cfg = ExponentConfig::from_c_str("3/2")
            .unwrap()
            .with_eps(0.1)
            .unwrap();
        assert_eq!(cfg.eps_cutoff(1024), 2);
        assert_eq!(cfg.eps_cutoff(10), 1);
    }

    #[test]
    fn parameter_validation() {
        let cfg = ExponentConfig::from_c_str("3/2").unwrap();
        assert!(cfg.clone().with_eps(0.0).is_err());
        assert!(cfg.clone().with_eps(0.7).is_err());
        assert!(cfg.clone().with_delta(0.01).is_err()); // below eta
        assert!(cfg.clone().with_precision(8, 4096).is_err());
        assert!(cfg.with_eps(0.05).is_ok());
    }
}
