//! Machine-word enclosure of n^(p/q) for the bulk scans.
//!
//! Everything here runs in u128 fixed point with 96 fraction bits (Q96) and
//! mirrors the arbitrary-precision route: evaluate exp((p/q) ln n) with all
//! roundings directed outward, fold a static series-error bound into the
//! interval, and only certify the floor when both endpoints agree. Ambiguity
//! returns `None` and the caller escalates to big-integer arithmetic, so this
//! path can only ever make the computation faster, not wrong.

use std::sync::OnceLock;

use num_traits::ToPrimitive;

use super::certified::CertifiedReal;
use crate::error::{Error, Result};

const FRAC: u32 = 96;
const ONE: u128 = 1 << FRAC;

/// Static bound (in Q96 ulps) on the floor-rounding error of either series
/// below. The true totals are a few hundred ulps; see the per-step comments.
const SERIES_ERR: u128 = 1 << 12;

/// Enclosure of ln 2 in Q96, pulled once from the arbitrary-precision
/// routine so there is no hand-transcribed constant to get wrong.
fn ln2_q96() -> (u128, u128) {
    static LN2: OnceLock<(u128, u128)> = OnceLock::new();
    *LN2.get_or_init(|| {
        let l = CertifiedReal::from_int(2, FRAC)
            .ln()
            .expect("ln 2 at fixed precision cannot fail");
        let (lo, hi) = l.endpoints();
        (
            lo.to_u128().expect("ln 2 mantissa fits u128"),
            hi.to_u128().expect("ln 2 mantissa fits u128"),
        )
    })
}

/// floor(a*b / 2^96) via a full 256-bit product. Requires a*b < 2^224.
fn mul_shift96(a: u128, b: u128) -> u128 {
    const M: u128 = (1 << 64) - 1;
    let (ah, al) = (a >> 64, a & M);
    let (bh, bl) = (b >> 64, b & M);
    let mut lo = al * bl;
    let mut hi = ah * bh;
    for cross in [al * bh, ah * bl] {
        let add = cross << 64;
        lo = lo.wrapping_add(add);
        hi += (cross >> 64) + u128::from(lo < add);
    }
    (hi << 32) | (lo >> FRAC)
}

/// floor(a * 2^96 / b). Requires b < 2^98 and a true quotient below 2^128;
/// runs as long division in 24-bit chunks so nothing overflows.
fn div_shift96(a: u128, b: u128) -> u128 {
    let mut q = a / b;
    let mut r = a % b;
    for _ in 0..4 {
        q <<= 24;
        r <<= 24;
        q += r / b;
        r %= b;
    }
    q
}

/// Q96 enclosure of ln n for n >= 2, via ln n = 2 atanh((y-1)/(y+1)) + s ln 2
/// with y = n/2^s in [1, 2).
fn ln_q96(n: u64) -> (u128, u128) {
    let s = 63 - n.leading_zeros();
    let y = (n as u128) << (FRAC - s); // exact
    let t = div_shift96(y - ONE, y + ONE); // <= 1 ulp low, t <= ~ONE/3
    let t2 = mul_shift96(t, t);
    let mut power = t;
    let mut sum: u128 = 0;
    let mut k: u128 = 0;
    while power != 0 && k < 64 {
        sum += power / (2 * k + 1);
        power = mul_shift96(power, t2);
        k += 1;
    }
    // <= 3 ulps of floor error per term plus the sub-ulp tail, doubled:
    // comfortably below 2^9; SERIES_ERR leaves an order of magnitude slack
    let ln_y = sum << 1;
    let (l2_lo, l2_hi) = ln2_q96();
    let s = s as u128;
    (
        ln_y.saturating_sub(SERIES_ERR) + s * l2_lo,
        ln_y + SERIES_ERR + s * l2_hi,
    )
}

/// Taylor value of exp(r) in Q96 for r in [0, 3/4]; floor error is covered
/// by SERIES_ERR at the call sites.
fn exp_q96(r: u128) -> u128 {
    debug_assert!(r <= 3 * (ONE / 4));
    let mut term = ONE;
    let mut sum = ONE;
    let mut j: u128 = 1;
    while term != 0 && j < 64 {
        term = mul_shift96(term, r) / j;
        sum += term;
        j += 1;
    }
    sum
}

/// Certified floor of n^(p/q) when it can be settled in machine words.
///
/// `Ok(Some(v))`: v is provably the floor. `Ok(None)`: undecided here
/// (enclosure touches an integer, the exponent is out of range for this
/// path, or the value sits near the u64 boundary); the caller must fall
/// back to arbitrary precision. `Err`: the value provably overflows u64.
pub(crate) fn floor_pow_q96(n: u64, p: u64, q: u64) -> Result<Option<u64>> {
    if n < 2 || q < 2 || p == 0 || p > (1 << 20) {
        return Ok(None);
    }
    let (l_lo, l_hi) = ln_q96(n);
    let (p, q) = (p as u128, q as u128);
    let z_lo = l_lo * p / q;
    let z_hi = (l_hi * p).div_ceil(q);
    let (ln2_lo, ln2_hi) = ln2_q96();
    // u64 range gate: the value is below 2^64 iff z < 64 ln 2
    if z_lo >= 64 * ln2_hi {
        return Err(Error::CapacityExceeded(format!(
            "floor of {n}^(p/q) does not fit in 64 bits"
        )));
    }
    if z_hi >= 64 * ln2_lo {
        return Ok(None);
    }
    // reduce z = k ln2 + r with r in [0, ln 2 + slack)
    let mut k = (z_lo / ln2_hi) as u32;
    while u128::from(k) * ln2_hi > z_lo {
        k -= 1;
    }
    while u128::from(k + 1) * ln2_hi <= z_lo {
        k += 1;
    }
    let k128 = u128::from(k);
    let r_lo = z_lo - k128 * ln2_hi;
    let r_hi = z_hi - k128 * ln2_lo;
    if r_hi > 3 * (ONE / 4) {
        return Ok(None);
    }
    let e_lo = exp_q96(r_lo).saturating_sub(SERIES_ERR);
    let e_hi = exp_q96(r_hi) + SERIES_ERR;
    debug_assert!(k <= 63);
    let f_lo = e_lo >> (FRAC - k);
    let f_hi = e_hi >> (FRAC - k);
    if f_lo != f_hi {
        return Ok(None);
    }
    Ok(u64::try_from(f_lo).ok())
}
