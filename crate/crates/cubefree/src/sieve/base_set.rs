//! The three base sets whose images under n -> floor(n^c) get counted:
//! all naturals, the primes, and the cube-free numbers. Membership, exact
//! counting, and in-order enumeration, all backed by the segmented sieves.

use std::fmt;
use std::str::FromStr;

use num_integer::Roots;

use super::{cubefree_range, cubefree_test_single, kfree_count, prime_range, primes_upto};
use crate::error::{Error, Result};

/// Chunk width for enumeration and counting sweeps.
const CHUNK: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseSet {
    Naturals,
    Primes,
    Cubefree,
}

impl BaseSet {
    pub fn label(self) -> &'static str {
        match self {
            BaseSet::Naturals => "naturals",
            BaseSet::Primes => "primes",
            BaseSet::Cubefree => "cubefree",
        }
    }

    /// Membership test for n >= 1.
    pub fn contains(self, n: u64) -> Result<bool> {
        if n == 0 {
            return Err(Error::InvalidConfig("base sets contain n >= 1 only".into()));
        }
        match self {
            BaseSet::Naturals => Ok(true),
            BaseSet::Primes => is_prime(n),
            BaseSet::Cubefree => cubefree_test_single(n),
        }
    }

    /// Exact number of members in [1, x].
    pub fn count(self, x: u64) -> Result<u64> {
        if x == 0 {
            return Ok(0);
        }
        match self {
            BaseSet::Naturals => Ok(x),
            BaseSet::Primes => {
                let mut total = 0u64;
                let mut lo = 1u64;
                while lo <= x {
                    let hi = (lo + CHUNK).min(x + 1);
                    total += prime_range(lo, hi)?.count();
                    lo = hi;
                }
                Ok(total)
            }
            BaseSet::Cubefree => kfree_count(x, 3),
        }
    }

    /// Visit every member of [lo, hi) in increasing order.
    pub fn for_each_in(self, lo: u64, hi: u64, mut f: impl FnMut(u64)) -> Result<()> {
        if lo < 1 || hi < lo {
            return Err(Error::InvalidConfig(format!(
                "enumeration range [{lo}, {hi}) needs 1 <= lo <= hi"
            )));
        }
        match self {
            BaseSet::Naturals => {
                for n in lo..hi {
                    f(n);
                }
            }
            _ => {
                let mut a = lo;
                while a < hi {
                    let b = (a + CHUNK).min(hi);
                    let seg = match self {
                        BaseSet::Primes => prime_range(a, b)?,
                        BaseSet::Cubefree => cubefree_range(a, b)?,
                        BaseSet::Naturals => unreachable!(),
                    };
                    seg.for_each_member(&mut f);
                    a = b;
                }
            }
        }
        Ok(())
    }

    /// Visit every member of [1, x] in increasing order.
    pub fn for_each_member(self, x: u64, f: impl FnMut(u64)) -> Result<()> {
        if x == 0 {
            return Ok(());
        }
        self.for_each_in(1, x + 1, f)
    }
}

impl fmt::Display for BaseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BaseSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naturals" | "n" => Ok(BaseSet::Naturals),
            "primes" | "p" => Ok(BaseSet::Primes),
            "cubefree" | "cube-free" | "f" => Ok(BaseSet::Cubefree),
            other => Err(Error::InvalidConfig(format!(
                "unknown base set {other:?}; expected naturals, primes, or cubefree"
            ))),
        }
    }
}

fn is_prime(n: u64) -> Result<bool> {
    if n < 2 {
        return Ok(false);
    }
    let root = n.sqrt();
    let primes = primes_upto(root)?;
    for &p in primes.iter().take_while(|&&p| p <= root) {
        if n % p == 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_count_at_a_million() {
        assert_eq!(BaseSet::Primes.count(1_000_000).unwrap(), 78_498);
    }

    #[test]
    fn counts_small() {
        assert_eq!(BaseSet::Naturals.count(10).unwrap(), 10);
        assert_eq!(BaseSet::Primes.count(10).unwrap(), 4);
        assert_eq!(BaseSet::Cubefree.count(10).unwrap(), 9); // all but 8
        assert_eq!(BaseSet::Primes.count(0).unwrap(), 0);
    }

    #[test]
    fn membership() {
        assert!(BaseSet::Naturals.contains(7).unwrap());
        assert!(BaseSet::Primes.contains(2).unwrap());
        assert!(!BaseSet::Primes.contains(1).unwrap());
        assert!(BaseSet::Primes.contains(1_000_000_007).unwrap());
        assert!(!BaseSet::Primes.contains(1_000_000_005).unwrap());
        assert!(!BaseSet::Cubefree.contains(64).unwrap());
        assert!(BaseSet::Cubefree.contains(12).unwrap());
        assert!(BaseSet::Naturals.contains(0).is_err());
    }

    #[test]
    fn enumeration_matches_membership() {
        for set in [BaseSet::Naturals, BaseSet::Primes, BaseSet::Cubefree] {
            let mut listed = Vec::new();
            set.for_each_member(200, |n| listed.push(n)).unwrap();
            let direct: Vec<u64> = (1..=200)
                .filter(|&n| set.contains(n).unwrap())
                .collect();
            assert_eq!(listed, direct, "{set}");
            assert_eq!(listed.len() as u64, set.count(200).unwrap(), "{set}");
        }
    }

    #[test]
    fn enumeration_crosses_chunk_boundaries() {
        // straddle the internal chunk width
        let lo = CHUNK - 50;
        let hi = CHUNK + 50;
        let mut listed = Vec::new();
        BaseSet::Primes.for_each_in(lo, hi, |n| listed.push(n)).unwrap();
        let seg = prime_range(lo, hi).unwrap();
        let mut direct = Vec::new();
        seg.for_each_member(|n| direct.push(n));
        assert_eq!(listed, direct);
    }

    #[test]
    fn labels_round_trip() {
        for set in [BaseSet::Naturals, BaseSet::Primes, BaseSet::Cubefree] {
            assert_eq!(set.label().parse::<BaseSet>().unwrap(), set);
        }
    }
}
