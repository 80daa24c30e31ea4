//! Segmented sieves for primes, Moebius values, and cube-free indicators,
//! plus the exact k-free counting formula and a fast single-value
//! cube-freeness test backed by a shared prime table.

mod base_set;

pub use base_set::BaseSet;

use std::sync::{Arc, OnceLock, RwLock};

use num_integer::Roots;

use crate::error::{Error, Result};

/// Hard cap on primes kept in the shared table. sqrt of any supported sieve
/// bound and cbrt of any u64 both sit far below it.
const PRIME_CACHE_CAP: u64 = 1 << 26;

/// Most entries a single bitmap segment may hold (8 MB of bits).
const MAX_BITMAP_LEN: u64 = 1 << 26;

/// Most entries a single Moebius segment may hold. Each entry carries the
/// unfactored remainder (u64) plus a value byte, so this is the memory-heavy
/// kind.
const MAX_MOBIUS_LEN: u64 = 1 << 23;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Prime,
    Cubefree,
    Mobius,
}

#[derive(Debug, Clone)]
enum SegmentData {
    Bits(Vec<u64>),
    Values(Vec<i8>),
}

/// One sieved half-open range [lo, hi).
#[derive(Debug, Clone)]
pub struct SieveSegment {
    lo: u64,
    hi: u64,
    kind: SegmentKind,
    data: SegmentData,
}

impl SieveSegment {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn kind(&self) -> SegmentKind {
        self.kind
    }

    /// Bitmap membership (prime / cubefree kinds).
    pub fn contains(&self, n: u64) -> bool {
        assert!(n >= self.lo && n < self.hi, "value outside segment");
        match &self.data {
            SegmentData::Bits(words) => {
                let i = (n - self.lo) as usize;
                words[i / 64] >> (i % 64) & 1 == 1
            }
            SegmentData::Values(vals) => vals[(n - self.lo) as usize] != 0,
        }
    }

    /// Moebius value (mobius kind only).
    pub fn mobius(&self, n: u64) -> i8 {
        assert!(n >= self.lo && n < self.hi, "value outside segment");
        match &self.data {
            SegmentData::Values(vals) => vals[(n - self.lo) as usize],
            SegmentData::Bits(_) => panic!("not a value segment"),
        }
    }

    /// Number of set bits / nonzero values in the segment.
    pub fn count(&self) -> u64 {
        match &self.data {
            SegmentData::Bits(words) => {
                words.iter().map(|w| u64::from(w.count_ones())).sum()
            }
            SegmentData::Values(vals) => vals.iter().filter(|v| **v != 0).count() as u64,
        }
    }

    /// Visit members (set bits) in increasing order.
    pub fn for_each_member(&self, mut f: impl FnMut(u64)) {
        match &self.data {
            SegmentData::Bits(words) => {
                for (wi, &w) in words.iter().enumerate() {
                    let mut w = w;
                    while w != 0 {
                        let b = w.trailing_zeros() as u64;
                        let n = self.lo + 64 * wi as u64 + b;
                        if n < self.hi {
                            f(n);
                        }
                        w &= w - 1;
                    }
                }
            }
            SegmentData::Values(vals) => {
                for (i, v) in vals.iter().enumerate() {
                    if *v != 0 {
                        f(self.lo + i as u64);
                    }
                }
            }
        }
    }
}

fn check_range(lo: u64, hi: u64, max_len: u64) -> Result<u64> {
    if lo < 1 || hi <= lo || hi > (1 << 63) {
        return Err(Error::InvalidConfig(format!(
            "sieve range [{lo}, {hi}) must satisfy 1 <= lo < hi <= 2^63"
        )));
    }
    let len = hi - lo;
    if len > max_len {
        return Err(Error::CapacityExceeded(format!(
            "sieve segment of {len} entries exceeds the {max_len} cap; split the range"
        )));
    }
    Ok(len)
}

fn bitmap_words(len: u64) -> Vec<u64> {
    vec![0u64; ((len + 63) / 64) as usize]
}

fn set_bit(words: &mut [u64], i: u64) {
    words[(i / 64) as usize] |= 1 << (i % 64);
}

fn clear_bit(words: &mut [u64], i: u64) {
    words[(i / 64) as usize] &= !(1 << (i % 64));
}

/// First multiple of step that is >= lo.
fn first_multiple(step: u64, lo: u64) -> u64 {
    lo.div_ceil(step) * step
}

/// Primes in [lo, hi) as a bitmap segment.
pub fn prime_range(lo: u64, hi: u64) -> Result<SieveSegment> {
    let len = check_range(lo, hi, MAX_BITMAP_LEN)?;
    let mut words = bitmap_words(len);
    for i in 0..len {
        set_bit(&mut words, i);
    }
    if lo == 1 {
        clear_bit(&mut words, 0);
    }
    let root = (hi - 1).sqrt();
    let primes = primes_upto(root)?;
    for &p in primes.iter().take_while(|&&p| p <= root) {
        // strike proper multiples of p; p itself stays prime
        let start = first_multiple(p, lo).max(p * p);
        let mut m = start;
        while m < hi {
            clear_bit(&mut words, m - lo);
            m += p;
        }
    }
    Ok(SieveSegment {
        lo,
        hi,
        kind: SegmentKind::Prime,
        data: SegmentData::Bits(words),
    })
}

/// Cube-free numbers in [lo, hi) as a bitmap segment: a bit is cleared iff
/// some prime cube divides the value. Striking prime cubes only (rather
/// than all cubes d^3) is enough because any cube divisor contains a prime
/// cube divisor.
pub fn cubefree_range(lo: u64, hi: u64) -> Result<SieveSegment> {
    let len = check_range(lo, hi, MAX_BITMAP_LEN)?;
    let mut words = bitmap_words(len);
    for i in 0..len {
        set_bit(&mut words, i);
    }
    let root = (hi - 1).nth_root(3);
    let primes = primes_upto(root)?;
    for &p in primes.iter().take_while(|&&p| p <= root) {
        let cube = p * p * p;
        let mut m = first_multiple(cube, lo);
        while m < hi {
            clear_bit(&mut words, m - lo);
            m += cube;
        }
    }
    Ok(SieveSegment {
        lo,
        hi,
        kind: SegmentKind::Cubefree,
        data: SegmentData::Bits(words),
    })
}

/// Moebius values on [lo, hi) as a value segment.
///
/// For each base prime p <= sqrt(hi-1) the p-exponent of every multiple in
/// range is stripped from a remainder table; a squared factor zeroes the
/// value, a simple factor flips its sign, and a surviving remainder > 1 is
/// the unique prime factor above the root, flipping once more.
pub fn mobius_range(lo: u64, hi: u64) -> Result<SieveSegment> {
    let len = check_range(lo, hi, MAX_MOBIUS_LEN)?;
    let mut vals = vec![1i8; len as usize];
    let mut rem: Vec<u64> = (lo..hi).collect();
    let root = (hi - 1).sqrt();
    let primes = primes_upto(root)?;
    for &p in primes.iter().take_while(|&&p| p <= root) {
        let mut m = first_multiple(p, lo);
        while m < hi {
            let i = (m - lo) as usize;
            let mut e = 0u32;
            while rem[i] % p == 0 {
                rem[i] /= p;
                e += 1;
            }
            if e >= 2 {
                vals[i] = 0;
            } else {
                vals[i] = -vals[i];
            }
            m += p;
        }
    }
    for (i, r) in rem.iter().enumerate() {
        if *r > 1 && vals[i] != 0 {
            vals[i] = -vals[i];
        }
    }
    Ok(SieveSegment {
        lo,
        hi,
        kind: SegmentKind::Mobius,
        data: SegmentData::Values(vals),
    })
}

/// Exact count of k-free integers in [1, x] by Moebius inversion:
/// sum over d <= x^(1/k) of mu(d) * floor(x / d^k).
pub fn kfree_count(x: u64, k: u32) -> Result<u64> {
    if x == 0 || k < 2 {
        return Err(Error::InvalidConfig(format!(
            "k-free count needs x >= 1 and k >= 2, got x={x}, k={k}"
        )));
    }
    let d_max = x.nth_root(k);
    let mut total: i128 = 0;
    let mut lo = 1u64;
    while lo <= d_max {
        let hi = (lo + (1 << 20)).min(d_max + 1);
        let seg = mobius_range(lo, hi)?;
        for d in lo..hi {
            let mu = seg.mobius(d);
            if mu != 0 {
                let dk = d.pow(k);
                total += i128::from(mu) * i128::from(x / dk);
            }
        }
        lo = hi;
    }
    Ok(u64::try_from(total).expect("k-free count is nonnegative"))
}

/// True iff no prime cube divides v.
pub fn cubefree_test_single(v: u64) -> Result<bool> {
    if v == 0 {
        return Err(Error::InvalidConfig("cube-free test needs v >= 1".into()));
    }
    if v < 8 {
        return Ok(true);
    }
    if v & 7 == 0 {
        return Ok(false);
    }
    let root = v.nth_root(3);
    let primes = primes_upto(root)?;
    for &p in primes.iter().take_while(|&&p| p <= root) {
        if p == 2 {
            continue;
        }
        let cube = p * p * p;
        if v % cube == 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Shared, auto-extending table of the primes up to a cached bound.
/// Readers receive a snapshot Arc; extension replaces the snapshot.
pub(crate) fn primes_upto(limit: u64) -> Result<Arc<Vec<u64>>> {
    static CACHE: OnceLock<RwLock<(u64, Arc<Vec<u64>>)>> = OnceLock::new();
    if limit > PRIME_CACHE_CAP {
        return Err(Error::CapacityExceeded(format!(
            "prime table to {limit} exceeds the {PRIME_CACHE_CAP} cap"
        )));
    }
    let cache = CACHE.get_or_init(|| RwLock::new((0, Arc::new(Vec::new()))));
    {
        let guard = cache.read().unwrap();
        if guard.0 >= limit {
            return Ok(Arc::clone(&guard.1));
        }
    }
    let mut guard = cache.write().unwrap();
    if guard.0 >= limit {
        return Ok(Arc::clone(&guard.1));
    }
    // grow geometrically so repeated small extensions stay cheap
    let new_limit = limit.max(guard.0 * 2).max(1 << 16).min(PRIME_CACHE_CAP);
    let primes = Arc::new(simple_sieve(new_limit));
    *guard = (new_limit, Arc::clone(&primes));
    Ok(primes)
}

/// Plain sieve of Eratosthenes, inclusive bound.
fn simple_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut is_prime = vec![true; n + 1];
    is_prime[0] = false;
    if n >= 1 {
        is_prime[1] = false;
    }
    let mut p = 2usize;
    while p * p <= n {
        if is_prime[p] {
            let mut m = p * p;
            while m <= n {
                is_prime[m] = false;
                m += p;
            }
        }
        p += 1;
    }
    is_prime
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i as u64))
        .collect()
}

/// Precomputed cube-divisibility tests for all primes p with p^3 <= max_v,
/// using the odd-modulus multiplicative-inverse trick: for odd m and the
/// inverse i of m modulo 2^64, v is a multiple of m iff v*i (wrapping)
/// lands at or below (2^64-1)/m. One multiply and one compare per prime.
pub(crate) struct CubeStrikes {
    max_v: u64,
    odd: Vec<(u64, u64)>, // (inverse of p^3 mod 2^64, u64::MAX / p^3)
}

impl CubeStrikes {
    #[inline]
    pub(crate) fn is_cubefree(&self, v: u64) -> bool {
        debug_assert!(v >= 1 && v <= self.max_v);
        if v & 7 == 0 {
            return false;
        }
        for &(inv, lim) in &self.odd {
            if v.wrapping_mul(inv) <= lim {
                return false;
            }
        }
        true
    }
}

/// Build the strike table for values up to max_v.
pub(crate) fn cube_strikes(max_v: u64) -> Result<CubeStrikes> {
    let root = max_v.nth_root(3);
    let primes = primes_upto(root)?;
    let odd = primes
        .iter()
        .take_while(|&&p| p <= root)
        .filter(|&&p| p != 2)
        .map(|&p| {
            let cube = p * p * p;
            (inverse_mod_2_64(cube), u64::MAX / cube)
        })
        .collect();
    Ok(CubeStrikes { max_v, odd })
}

/// Inverse of an odd value modulo 2^64 by Newton iteration; five steps take
/// the 3 correct low bits of the seed past 64.
fn inverse_mod_2_64(m: u64) -> u64 {
    debug_assert!(m % 2 == 1);
    let mut inv = m;
    for _ in 0..5 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(m.wrapping_mul(inv)));
    }
    debug_assert_eq!(m.wrapping_mul(inv), 1);
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mobius_known_values() {
        let seg = mobius_range(1, 40).unwrap();
        assert_eq!(seg.mobius(1), 1);
        assert_eq!(seg.mobius(2), -1);
        assert_eq!(seg.mobius(4), 0);
        assert_eq!(seg.mobius(6), 1);
        assert_eq!(seg.mobius(30), -1);
        assert_eq!(seg.mobius(36), 0);
    }

    #[test]
    fn cubefree_known_values() {
        let seg = cubefree_range(1, 30).unwrap();
        assert!(seg.contains(1));
        assert!(!seg.contains(8));
        assert!(seg.contains(9));
        assert!(!seg.contains(16));
        assert!(!seg.contains(24));
        assert!(!seg.contains(27));
        assert!(seg.contains(25));
    }

    #[test]
    fn prime_known_values() {
        let seg = prime_range(1, 100).unwrap();
        assert!(!seg.contains(1));
        assert!(seg.contains(2));
        assert!(seg.contains(3));
        assert!(!seg.contains(4));
        assert!(seg.contains(97));
        assert_eq!(seg.count(), 25); // pi(99)
    }

    #[test]
    fn high_segments() {
        // primes in a window near 10^9
        let seg = prime_range(1_000_000_000, 1_000_000_100).unwrap();
        let known = [
            1_000_000_007u64,
            1_000_000_009,
            1_000_000_021,
            1_000_000_033,
            1_000_000_087,
            1_000_000_093,
            1_000_000_097,
        ];
        let mut found = Vec::new();
        seg.for_each_member(|n| found.push(n));
        assert_eq!(found, known);
    }

    #[test]
    fn kfree_count_examples() {
        assert_eq!(kfree_count(100, 3).unwrap(), 85);
        assert_eq!(kfree_count(7, 3).unwrap(), 7);
        assert_eq!(kfree_count(1, 2).unwrap(), 1);
        // square-free density sanity: 6/pi^2 ~ 0.6079
        let sf = kfree_count(1_000_000, 2).unwrap();
        assert!((sf as f64 / 1e6 - 0.6079).abs() < 1e-3);
    }

    #[test]
    fn kfree_count_matches_bitmap() {
        for x in [10u64, 100, 1000, 54_321] {
            let seg = cubefree_range(1, x + 1).unwrap();
            assert_eq!(kfree_count(x, 3).unwrap(), seg.count(), "x = {x}");
        }
    }

    #[test]
    fn single_test_examples() {
        assert!(!cubefree_test_single(8).unwrap());
        assert!(cubefree_test_single(1).unwrap());
        assert!(cubefree_test_single(9).unwrap());
        // 10^9 = 2^9 * 5^9 contains 2^3
        assert!(!cubefree_test_single(1_000_000_000).unwrap());
        // 10^9 + 1 = 7 * 11 * 13 * 19 * 52579, squarefree
        assert!(cubefree_test_single(1_000_000_001).unwrap());
    }

    #[test]
    fn mobius_cubefree_identity_small() {
        // sum of mu(d) over cubes d^3 | n is the cube-free indicator
        let n_max = 20_000u64;
        let mob = mobius_range(1, 30).unwrap();
        let mut acc = vec![0i32; (n_max + 1) as usize];
        let mut d = 1u64;
        while d * d * d <= n_max {
            let mu = mob.mobius(d);
            if mu != 0 {
                let step = d * d * d;
                let mut m = step;
                while m <= n_max {
                    acc[m as usize] += i32::from(mu);
                    m += step;
                }
            }
            d += 1;
        }
        let seg = cubefree_range(1, n_max + 1).unwrap();
        for n in 1..=n_max {
            let want = i32::from(seg.contains(n));
            assert_eq!(acc[n as usize], want, "identity fails at n = {n}");
        }
    }

    #[test]
    fn strike_table_agrees_with_division() {
        let table = cube_strikes(1_000_000).unwrap();
        for v in 1..=20_000u64 {
            let direct = cubefree_test_single(v).unwrap();
            assert_eq!(table.is_cubefree(v), direct, "v = {v}");
        }
    }

    #[test]
    fn range_validation() {
        assert!(prime_range(0, 10).is_err());
        assert!(prime_range(10, 10).is_err());
        assert!(mobius_range(1, 2 + MAX_MOBIUS_LEN).is_err());
    }

    proptest! {
        #[test]
        fn segment_concatenation(a in 1u64..100_000, len1 in 1u64..2_000, len2 in 1u64..2_000) {
            let b = a + len1;
            let c = b + len2;
            for make in [prime_range, cubefree_range, mobius_range] {
                let left = make(a, b).unwrap();
                let right = make(b, c).unwrap();
                let whole = make(a, c).unwrap();
                for n in a..c {
                    let part = if n < b { &left } else { &right };
                    match whole.kind() {
                        SegmentKind::Mobius => prop_assert_eq!(part.mobius(n), whole.mobius(n)),
                        _ => prop_assert_eq!(part.contains(n), whole.contains(n)),
                    }
                }
            }
        }

        #[test]
        fn inverse_trick_is_divisibility(v in 1u64.., p in prop::sample::select(vec![3u64, 5, 7, 11, 101, 1009])) {
            let cube = p * p * p;
            let inv = inverse_mod_2_64(cube);
            let lim = u64::MAX / cube;
            prop_assert_eq!(v.wrapping_mul(inv) <= lim, v % cube == 0);
        }
    }
}
