//! Exact rationals parsed from decimal or fraction strings.
//!
//! Exponents like `c` are carried as exact ratios of big integers, so
//! statements such as "n^c is an integer" are decidable instead of being
//! at the mercy of binary floating point. `"1.5"` parses to 3/2, `"3/2"`
//! stays 3/2, and the two compare equal.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Hard cap on the input length for [`Rational::from_str`]; longer strings
/// are rejected instead of being fed to big-integer parsing.
pub const MAX_PARSE_LEN: usize = 4096;

/// An exact rational number, always kept in reduced form with a positive
/// denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::InvalidConfig("denominator is zero".into()));
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn from_u64(n: u64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio_u64(p: u64, q: u64) -> Result<Self> {
        Self::new(BigInt::from(p), BigInt::from(q))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Numerator and denominator as u64, when both fit and the value is
    /// nonnegative. Fast integer paths key off this.
    pub fn to_u64_pair(&self) -> Option<(u64, u64)> {
        if self.0.numer().is_negative() {
            return None;
        }
        Some((self.0.numer().to_u64()?, self.0.denom().to_u64()?))
    }

    /// Numerator magnitude and denominator as big unsigned integers.
    pub fn unsigned_parts(&self) -> (BigUint, BigUint) {
        (
            self.0.numer().magnitude().clone(),
            self.0.denom().magnitude().clone(),
        )
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.0.is_zero() {
            return Err(Error::InvalidConfig("reciprocal of zero".into()));
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Rational(&self.0 * &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Rational(&self.0 - &other.0)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"p/q"` fractions, plain integers, and exact decimals.
    /// Decimal strings are converted without rounding: `"1.5"` becomes 3/2,
    /// `"0.1"` becomes 1/10.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidConfig("empty rational literal".into()));
        }
        if s.len() > MAX_PARSE_LEN {
            return Err(Error::InvalidConfig(format!(
                "rational literal longer than {MAX_PARSE_LEN} bytes"
            )));
        }
        if let Some((num, den)) = s.split_once('/') {
            let numer = parse_int(num.trim())?;
            let denom = parse_int(den.trim())?;
            if !denom.is_positive() {
                return Err(Error::InvalidConfig(format!(
                    "denominator must be positive in {s:?}"
                )));
            }
            return Rational::new(numer, denom);
        }
        match s.split_once('.') {
            None => Ok(Rational(BigRational::from_integer(parse_int(s)?))),
            Some((int_part, frac_part)) => {
                if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::InvalidConfig(format!("bad decimal literal {s:?}")));
                }
                let (sign, int_digits) = match int_part.as_bytes().first() {
                    Some(b'-') => (-1, &int_part[1..]),
                    Some(b'+') => (1, &int_part[1..]),
                    _ => (1, int_part),
                };
                if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::InvalidConfig(format!("bad decimal literal {s:?}")));
                }
                // value = (int_digits * 10^k + frac_digits) / 10^k, k = frac len
                let mut digits = String::with_capacity(int_digits.len() + frac_part.len());
                digits.push_str(int_digits);
                digits.push_str(frac_part);
                if digits.is_empty() {
                    return Err(Error::InvalidConfig(format!("bad decimal literal {s:?}")));
                }
                let numer = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(|| {
                    Error::InvalidConfig(format!("bad decimal literal {s:?}"))
                })?;
                let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
                Rational::new(numer * sign, denom)
            }
        }
    }
}

fn parse_int(s: &str) -> Result<BigInt> {
    if s.is_empty() {
        return Err(Error::InvalidConfig("empty integer literal".into()));
    }
    let digits = match s.as_bytes()[0] {
        b'+' | b'-' => &s[1..],
        _ => s,
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::InvalidConfig(format!("bad integer literal {s:?}")));
    }
    BigInt::from_str(s).map_err(|e| Error::InvalidConfig(format!("bad integer literal {s:?}: {e}")))
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Parse a scale parameter such as `"1000000"`, `"1e6"`, or `"2.5e3"` to an
/// exact u64. The mantissa-exponent form must denote an integer.
pub fn parse_scale(s: &str) -> Result<u64> {
    let s = s.trim();
    if s.is_empty() || s.len() > 64 {
        return Err(Error::InvalidConfig(format!("bad scale literal {s:?}")));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        None => (s, 0u32),
        Some((m, e)) => {
            let exp: u32 = e
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad scale exponent in {s:?}")))?;
            if exp > 19 {
                return Err(Error::InvalidConfig(format!("scale {s:?} exceeds u64")));
            }
            (m, exp)
        }
    };
    let (int_digits, frac_digits) = match mantissa.split_once('.') {
        None => (mantissa, ""),
        Some((i, f)) => (i, f),
    };
    if int_digits.is_empty()
        || !int_digits.bytes().all(|b| b.is_ascii_digit())
        || !frac_digits.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(Error::InvalidConfig(format!("bad scale literal {s:?}")));
    }
    if frac_digits.len() > exp as usize {
        return Err(Error::InvalidConfig(format!(
            "scale {s:?} is not an integer"
        )));
    }
    let mut value: u64 = 0;
    let overflow = || Error::InvalidConfig(format!("scale {s:?} exceeds u64"));
    for b in int_digits.bytes().chain(frac_digits.bytes()) {
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add((b - b'0') as u64))
            .ok_or_else(overflow)?;
    }
    for _ in 0..(exp as usize - frac_digits.len()) {
        value = value.checked_mul(10).ok_or_else(overflow)?;
    }
    Ok(value)
}
