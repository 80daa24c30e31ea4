//! Exact floors and certified enclosures of rational powers n^(p/q).
//!
//! The floor computation is layered so that the cheap routes answer almost
//! every query and the expensive ones only settle stragglers:
//!
//! 1. perfect-power detection — with gcd(p,q)=1, n^(p/q) is an integer
//!    exactly when n is a perfect q-th power, so integrality is *decided*,
//!    never guessed from an epsilon;
//! 2. exact machine arithmetic when n^p fits in a u128 (the floor is then an
//!    integer root, correct by construction);
//! 3. a u128 fixed-point enclosure (`fastpath`);
//! 4. an arbitrary-precision interval ladder that doubles its working
//!    precision until the enclosure of n^(p/q) contains no integer.
//!
//! Step 1 guarantees the ladder terminates: any value reaching it is
//! irrational, so its enclosure eventually excludes every integer.

mod certified;
mod config;
mod fastpath;

pub use certified::{zeta3_interval, CertifiedReal};
pub use config::{ExponentConfig, Mode, DEFAULT_MAX_BITS, DEFAULT_START_BITS};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Roots;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest bit-size of an exact integer power this module will materialize
/// (8 MB). Configurations beyond that are reported, not attempted.
const MAX_POW_BITS: u64 = 1 << 26;

/// The floor [n^c] for the configured exponent, provably correct.
pub fn floor_pow(n: u64, cfg: &ExponentConfig) -> Result<u64> {
    floor_pow_rat(n, cfg.c(), cfg.start_bits(), cfg.max_bits())
}

/// As `floor_pow` with explicit precision bounds, for callers that manage
/// their own configuration.
pub fn floor_pow_rat(n: u64, c: &Rational, start_bits: u32, max_bits: u32) -> Result<u64> {
    if c.is_negative() || c.numer().is_zero() {
        return Err(Error::InvalidConfig(format!(
            "floor exponent must be positive, got {c}"
        )));
    }
    if n == 0 {
        return Ok(0);
    }
    if n == 1 {
        return Ok(1);
    }
    let (p, q) = c.to_u64_pair().ok_or_else(|| {
        Error::CapacityExceeded("exponent numerator or denominator exceeds u64".into())
    })?;
    if q == 1 {
        return int_pow_u64(n, p);
    }
    // gcd(p,q)=1, so n^(p/q) is rational iff n = r^q for an integer r; a
    // u64 above 1 can only be a perfect q-th power for q <= 63
    if q <= 63 {
        let r = n.nth_root(q as u32);
        if r.checked_pow(q as u32) == Some(n) {
            return int_pow_u64(r, p);
        }
    }
    // exact route: floor((n^p)^(1/q)) computed as an integer root
    let nbits = u64::from(64 - n.leading_zeros());
    if p.saturating_mul(nbits) <= 126 {
        let v = (n as u128).pow(p as u32);
        if q > u32::MAX as u64 {
            return Ok(1); // v < 2^q, so the root is 1
        }
        let root = v.nth_root(q as u32);
        return Ok(root as u64); // root of a u128 power of a u64 fits
    }
    if let Some(v) = fastpath::floor_pow_q96(n, p, q)? {
        return Ok(v);
    }
    // arbitrary-precision ladder; the value is irrational here, so some
    // precision level must separate it from every integer
    let mut bits = start_bits;
    loop {
        let enc = pow_enclosure(n, p, q, bits)?;
        if let Some(f) = enc.floor_checked() {
            return f
                .to_u64()
                .ok_or_else(|| Error::CapacityExceeded(format!("floor of {n}^{p}/{q} exceeds u64")));
        }
        if bits >= max_bits {
            return Err(Error::IndeterminateFloor { bits });
        }
        bits = (bits * 2).min(max_bits);
    }
}

/// Certified enclosure of m^exponent + shift, tightened until its width is
/// at most 2^-precision_bits. The exponent may be negative.
pub fn eval_pow(
    m: u64,
    exponent: &Rational,
    shift: &CertifiedReal,
    precision_bits: u32,
) -> Result<CertifiedReal> {
    if m == 0 {
        return Err(Error::InvalidConfig("power base must be >= 1".into()));
    }
    if precision_bits < 16 {
        return Err(Error::InvalidConfig(format!(
            "requested precision {precision_bits} below the 16-bit minimum"
        )));
    }
    let mut bits = precision_bits + 32;
    let cap = (precision_bits + 32).max(4 * DEFAULT_MAX_BITS);
    loop {
        let power = pow_signed(m, exponent, bits)?;
        let value = power.add(shift);
        let budget = BigInt::from(1) << (value.bits() - precision_bits);
        if value.width_ulps() <= budget {
            return Ok(value);
        }
        if bits >= cap {
            return Err(Error::PrecisionExceeded {
                bits,
                context: "power-plus-shift enclosure would not tighten",
            });
        }
        // a shift interval wider than the target can never tighten from here
        if !shift.is_exact() {
            let shift_budget = BigInt::from(1) << (shift.bits().saturating_sub(precision_bits));
            if shift.width_ulps() > shift_budget {
                return Err(Error::PrecisionExceeded {
                    bits: shift.bits(),
                    context: "shift interval wider than the requested tolerance",
                });
            }
        }
        bits = (bits * 2).min(cap);
    }
}

/// The sawtooth psi(t) = t - [t] - 1/2, certified; lies in [-1/2, 1/2).
pub fn psi(t: &CertifiedReal) -> Result<CertifiedReal> {
    let f = t.frac().ok_or(Error::IndeterminateFloor { bits: t.bits() })?;
    Ok(f.add_rational(&neg_half()))
}

/// Distance from t to the nearest integer, in [0, 1/2], certified.
pub fn dist_nearest_int(t: &CertifiedReal) -> Result<CertifiedReal> {
    t.dist_nearest_int()
        .ok_or(Error::IndeterminateFloor { bits: t.bits() })
}

/// The unit complex number e(t) = exp(2 pi i t). Plain float precision:
/// this feeds diagnostic sums, not certified arithmetic.
pub fn e_of(t: f64) -> Complex64 {
    let frac = t - t.floor();
    let angle = std::f64::consts::TAU * frac;
    Complex64::new(angle.cos(), angle.sin())
}

fn neg_half() -> Rational {
    Rational::new(BigInt::from(-1), BigInt::from(2)).expect("constant -1/2")
}

fn int_pow_u64(base: u64, p: u64) -> Result<u64> {
    if base == 1 {
        return Ok(1);
    }
    u32::try_from(p)
        .ok()
        .and_then(|p32| base.checked_pow(p32))
        .ok_or_else(|| Error::CapacityExceeded(format!("{base}^{p} exceeds u64")))
}

/// Interval for n^(p/q) at the given precision, q >= 2, value irrational.
fn pow_enclosure(n: u64, p: u64, q: u64, bits: u32) -> Result<CertifiedReal> {
    if q <= 64 {
        root_enclosure(n, p, q, bits)
    } else {
        let exponent = Rational::from_ratio_u64(p, q)?;
        let x = CertifiedReal::from_int(BigInt::from(n), bits);
        x.ln()?.mul_rational(&exponent).exp()
    }
}

/// Root-based interval: the mantissa of n^(p/q) at `bits` fraction bits is
/// the integer q-th root of n^p * 2^(q*bits), bracketed to one ulp (or
/// exact when the scaled power is a perfect q-th power).
fn root_enclosure(n: u64, p: u64, q: u64, bits: u32) -> Result<CertifiedReal> {
    let nbits = u64::from(64 - n.leading_zeros());
    if p.saturating_mul(nbits).saturating_add(q * u64::from(bits)) > MAX_POW_BITS {
        return Err(Error::CapacityExceeded(format!(
            "integer-root enclosure of {n}^{p}/{q} at {bits} bits is too large"
        )));
    }
    let scaled = BigUint::from(n).pow(p as u32) << (q * u64::from(bits)) as usize;
    let root = scaled.nth_root(q as u32);
    let lo = BigInt::from(root.clone());
    let hi = if root.pow(q as u32) == scaled {
        lo.clone()
    } else {
        &lo + 1
    };
    Ok(CertifiedReal::from_parts(lo, hi, bits))
}

/// n^exponent as an interval, handling negative exponents by inversion.
fn pow_signed(n: u64, exponent: &Rational, bits: u32) -> Result<CertifiedReal> {
    if exponent.numer().is_zero() {
        return Ok(CertifiedReal::from_int(1, bits));
    }
    let magnitude = if exponent.is_negative() {
        Rational::new(-exponent.numer().clone(), exponent.denom().clone())?
    } else {
        exponent.clone()
    };
    let (p, q) = magnitude.to_u64_pair().ok_or_else(|| {
        Error::CapacityExceeded("exponent numerator or denominator exceeds u64".into())
    })?;
    let positive = if q == 1 {
        let nbits = u64::from(64 - n.leading_zeros());
        if p.saturating_mul(nbits) > MAX_POW_BITS {
            return Err(Error::CapacityExceeded(format!(
                "{n}^{p} is too large to materialize"
            )));
        }
        CertifiedReal::from_int(BigInt::from(BigUint::from(n).pow(p as u32)), bits)
    } else if q <= 63 && {
        let r = n.nth_root(q as u32);
        r.checked_pow(q as u32) == Some(n)
    } {
        // exact integer-boundary case: n = r^q, so n^(p/q) = r^p
        let r = n.nth_root(q as u32);
        CertifiedReal::from_int(BigInt::from(BigUint::from(r).pow(p as u32)), bits)
    } else {
        pow_enclosure(n, p, q, bits)?
    };
    if exponent.is_negative() {
        positive.recip()
    } else {
        Ok(positive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::str::FromStr;

    fn cfg(c: &str) -> ExponentConfig {
        ExponentConfig::from_c_str(c).unwrap()
    }

    #[test]
    fn floor_pow_basics() {
        let c32 = cfg("3/2");
        // [n^1.5] for n = 1..10
        let want = [1u64, 2, 5, 8, 11, 14, 18, 22, 27, 31];
        for (n, w) in (1..=10).zip(want) {
            assert_eq!(floor_pow(n, &c32).unwrap(), w, "n = {n}");
        }
        // exact integer boundary
        assert_eq!(floor_pow(4, &c32).unwrap(), 8);
        assert_eq!(floor_pow(10, &cfg("9/5")).unwrap(), 63);
        for c in ["3/2", "5/3", "9/5", "1001/1000"] {
            assert_eq!(floor_pow(1, &cfg(c)).unwrap(), 1);
        }
    }

    #[test]
    fn floor_pow_integer_exponents_and_overflow() {
        assert_eq!(floor_pow(7, &cfg("2")).unwrap(), 49);
        assert_eq!(floor_pow(2, &cfg("10")).unwrap(), 1024);
        assert!(matches!(
            floor_pow(u64::MAX, &cfg("2")),
            Err(Error::CapacityExceeded(_))
        ));
        assert!(matches!(
            floor_pow(1 << 60, &cfg("3/2")),
            Err(Error::CapacityExceeded(_))
        ));
    }

    #[test]
    fn floor_pow_huge_denominator() {
        // 2^(1001/1000): barely above 2
        assert_eq!(floor_pow(2, &cfg("1001/1000")).unwrap(), 2);
        // 10^(5497/3000) = 10^1.8323... = 67.95...
        assert_eq!(floor_pow(10, &cfg("5497/3000")).unwrap(), 67);
        // near the theorem's upper exponent: 7^(10997/6000)
        let c = cfg("10997/6000");
        let v = floor_pow(7, &c).unwrap();
        // 7^1.83283... = 35.35...
        assert_eq!(v, 35);
    }

    #[test]
    fn eval_pow_examples() {
        let zero = CertifiedReal::from_int(0, 64);
        // 8^(1/3) = 2 exactly
        let v = eval_pow(8, &Rational::from_str("1/3").unwrap(), &zero, 64).unwrap();
        assert!(v.is_exact());
        assert_eq!(v.floor_checked(), Some(BigInt::from(2)));
        // 2^(2/3) = 1.587401051968199...
        let v = eval_pow(2, &Rational::from_str("2/3").unwrap(), &zero, 80).unwrap();
        assert!((v.to_f64() - 1.587_401_051_968_199_5).abs() < 1e-14);
        assert!(v.width() <= 2f64.powi(-80) * 1.001);
        // 16^(1/2) + 1/2 = 4.5 exactly
        let half = CertifiedReal::from_rational(&Rational::from_str("1/2").unwrap(), 64);
        let v = eval_pow(16, &Rational::from_str("1/2").unwrap(), &half, 32).unwrap();
        assert!((v.to_f64() - 4.5).abs() < 1e-12);
        // negative exponent: 8^(-1/3) = 1/2
        let v = eval_pow(8, &Rational::from_str("-1/3").unwrap(), &zero, 64).unwrap();
        assert!((v.to_f64() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn psi_and_distance_examples() {
        let at = |s: &str| CertifiedReal::from_rational(&Rational::from_str(s).unwrap(), 64);
        assert!((psi(&at("1/4")).unwrap().to_f64() + 0.25).abs() < 1e-15);
        assert!((psi(&at("3")).unwrap().to_f64() + 0.5).abs() < 1e-15);
        assert!((psi(&at("3/4")).unwrap().to_f64() - 0.25).abs() < 1e-15);
        assert!((dist_nearest_int(&at("23/10")).unwrap().to_f64() - 0.3).abs() < 1e-15);
        assert!((dist_nearest_int(&at("5/2")).unwrap().to_f64() - 0.5).abs() < 1e-15);
        assert!((dist_nearest_int(&at("-1/5")).unwrap().to_f64() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn e_of_unit_circle() {
        let i = e_of(0.25);
        assert!((i.re).abs() < 1e-12 && (i.im - 1.0).abs() < 1e-12);
        assert!((e_of(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((e_of(0.5) - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        for t in [-2.3, 0.1, 0.77, 123.456] {
            assert!((e_of(t).norm() - 1.0).abs() < 1e-12);
            assert!((e_of(t) - e_of(t + 1.0)).norm() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn floor_monotone_in_n(n in 1u64..50_000, c in prop::sample::select(vec!["3/2", "5/3", "9/5", "5497/3000", "1001/1000"])) {
            let cfg = cfg(c);
            let a = floor_pow(n, &cfg).unwrap();
            let b = floor_pow(n + 1, &cfg).unwrap();
            prop_assert!(a <= b);
        }

        #[test]
        fn integer_boundary_exact(m in 1u64..200, pq in prop::sample::select(vec![(3u64, 2u64), (5, 3), (7, 5)])) {
            let (p, q) = pq;
            let n = m.pow(q as u32);
            let c = Rational::from_ratio_u64(p, q).unwrap();
            let got = floor_pow_rat(n, &c, 96, 4096).unwrap();
            prop_assert_eq!(got, m.pow(p as u32));
        }

        #[test]
        fn psi_periodic(num in -1_000i64..1_000, den in 1i64..50, k in -5i64..5) {
            let t = Rational::new(BigInt::from(num), BigInt::from(den)).unwrap();
            let tk = Rational::new(BigInt::from(num + k * den), BigInt::from(den)).unwrap();
            let a = psi(&CertifiedReal::from_rational(&t, 96)).unwrap();
            let b = psi(&CertifiedReal::from_rational(&tk, 96)).unwrap();
            prop_assert!((a.to_f64() - b.to_f64()).abs() < 1e-15);
            // psi(t) + 1/2 = t - [t], up to float rendering of the endpoints
            let f = CertifiedReal::from_rational(&t, 96).frac().unwrap();
            prop_assert!((a.to_f64() + 0.5 - f.to_f64()).abs() < 1e-12);
        }

        #[test]
        fn dist_symmetry(num in -500i64..500, den in 1i64..40) {
            let t = Rational::new(BigInt::from(num), BigInt::from(den)).unwrap();
            let neg = Rational::new(BigInt::from(-num), BigInt::from(den)).unwrap();
            let a = dist_nearest_int(&CertifiedReal::from_rational(&t, 96)).unwrap();
            let b = dist_nearest_int(&CertifiedReal::from_rational(&neg, 96)).unwrap();
            prop_assert!((a.to_f64() - b.to_f64()).abs() < 1e-20);
        }
    }
}
