//! The two proof-shaped decompositions of the joint count: the split of
//! the cube-divisor sum at the cutoff x^eps, and the dyadic sawtooth sums
//! with their shifted arguments.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::counting::zeta3;
use crate::error::{Error, Result};
use crate::power::{eval_pow, floor_pow, psi, CertifiedReal, ExponentConfig};
use crate::rational::Rational;
use crate::sieve::{cube_strikes, mobius_range, BaseSet};
use crate::sum::NeumaierSum;

/// Work unit for the parallel divisor-split sweep.
const SPLIT_CHUNK: u64 = 1 << 18;

/// Up to this x the complementary sum is re-derived by direct summation
/// over the large divisors as well, not just from the identity.
const DIRECT_CHECK_MAX: u64 = 100_000;

/// Starting certified precision for sawtooth terms; 2^-48 is well below
/// the 1e-12 per-term budget.
const TERM_PREC_BITS: u32 = 48;

/// Precision ceiling for a single sawtooth term before giving up on an
/// argument that sits indistinguishably close to an integer.
const TERM_PREC_CAP: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            other => Err(Error::InvalidConfig(format!(
                "unknown sign {other:?}; expected + or -"
            ))),
        }
    }
}

/// The cube-divisor sum over n <= x split at d <= x^eps. Both pieces are
/// integers; their sum equals the joint count by construction, and for
/// small x the second piece is re-derived directly as a cross-check.
#[derive(Debug, Clone)]
pub struct SigmaSplit {
    pub x: u64,
    pub cfg: ExponentConfig,
    pub base_set: BaseSet,
    pub sigma1: i64,
    pub sigma2: i64,
    pub check_total: u64,
}

/// One dyadic sawtooth sum: over d in (D, 2D] and l in (L, 2L], the terms
/// psi((d^3 l)^gamma +- 4 gamma (D^3 L)^(gamma-1)), each certified to
/// 1e-12 before its midpoint joins a compensated accumulation.
#[derive(Debug, Clone)]
pub struct TSumResult {
    pub d_base: u64,
    pub l_base: u64,
    pub gamma: Rational,
    pub sign: Sign,
    pub value: f64,
    pub n_terms: u64,
    pub bound: f64,
    pub ratio: f64,
}

/// Split the divisor sum sum_{n <= x, n in A} sum_{d^3 | floor(n^c)} mu(d)
/// at the cutoff d <= x^eps.
pub fn sigma_split(x: u64, cfg: &ExponentConfig, base_set: BaseSet) -> Result<SigmaSplit> {
    if x == 0 {
        return Err(Error::InvalidConfig("sigma split needs x >= 1".into()));
    }
    let cutoff = cfg.eps_cutoff(x).max(1);
    let v_max = floor_pow(x, cfg)?.max(1);
    let strikes = cube_strikes(v_max)?;
    let d_limit = if x <= DIRECT_CHECK_MAX {
        cbrt(v_max).max(cutoff)
    } else {
        cutoff
    };
    let mob = mobius_range(1, d_limit + 1)?;

    let n_chunks = x.div_ceil(SPLIT_CHUNK);
    let (sigma1, direct2, total) = (0..n_chunks)
        .into_par_iter()
        .map(|ci| -> Result<(i64, i64, u64)> {
            let lo = 1 + ci * SPLIT_CHUNK;
            let hi = (lo + SPLIT_CHUNK).min(x + 1);
            let mut s1 = 0i64;
            let mut s2 = 0i64;
            let mut total = 0u64;
            let mut failed: Option<Error> = None;
            base_set.for_each_in(lo, hi, |n| {
                if failed.is_some() {
                    return;
                }
                let v = match floor_pow(n, cfg) {
                    Ok(v) => v,
                    Err(e) => {
                        failed = Some(e);
                        return;
                    }
                };
                if strikes.is_cubefree(v) {
                    total += 1;
                }
                let mut d = 1u64;
                while d <= d_limit && d * d * d <= v {
                    let mu = mob.mobius(d);
                    if mu != 0 && v % (d * d * d) == 0 {
                        if d <= cutoff {
                            s1 += i64::from(mu);
                        } else {
                            s2 += i64::from(mu);
                        }
                    }
                    d += 1;
                }
            })?;
            match failed {
                Some(e) => Err(e),
                None => Ok((s1, s2, total)),
            }
        })
        .try_reduce(
            || (0, 0, 0),
            |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)),
        )?;

    let sigma2 = total as i64 - sigma1;
    if x <= DIRECT_CHECK_MAX {
        assert_eq!(
            direct2, sigma2,
            "direct large-divisor sum disagrees with the identity-derived value"
        );
    }
    Ok(SigmaSplit {
        x,
        cfg: cfg.clone(),
        base_set,
        sigma1,
        sigma2,
        check_total: total,
    })
}

/// The truncated divisor sum with the loops swapped: for each d up to the
/// cutoff, count the n whose power floor d^3 divides, then weight by
/// mu(d). A genuinely independent pass; must match sigma1 exactly.
fn sigma1_rearranged(x: u64, cfg: &ExponentConfig, base_set: BaseSet) -> Result<i64> {
    let cutoff = cfg.eps_cutoff(x).max(1);
    let mob = mobius_range(1, cutoff + 1)?;
    let mut total = 0i64;
    for d in 1..=cutoff {
        let mu = mob.mobius(d);
        if mu == 0 {
            continue;
        }
        let cube = d
            .checked_mul(d)
            .and_then(|s| s.checked_mul(d))
            .ok_or_else(|| Error::CapacityExceeded(format!("divisor cube {d}^3 overflows")))?;
        let mut count = 0u64;
        let mut failed: Option<Error> = None;
        base_set.for_each_member(x, |n| {
            if failed.is_some() {
                return;
            }
            match floor_pow(n, cfg) {
                Ok(v) => {
                    if v % cube == 0 {
                        count += 1;
                    }
                }
                Err(e) => failed = Some(e),
            }
        })?;
        if let Some(e) = failed {
            return Err(e);
        }
        total += i64::from(mu) * count as i64;
    }
    Ok(total)
}

/// |sigma1 - A(x)/zeta(3)|, recomputing sigma1 through the swapped loop
/// order first and insisting the two integer evaluations agree.
pub fn sigma1_main_compare(x: u64, cfg: &ExponentConfig, base_set: BaseSet) -> Result<f64> {
    let split = sigma_split(x, cfg, base_set)?;
    let rearranged = sigma1_rearranged(x, cfg, base_set)?;
    assert_eq!(
        split.sigma1, rearranged,
        "swapping the summation order changed the truncated divisor sum"
    );
    let base_count = base_set.count(x)?;
    let z = zeta3(1e-14)?;
    Ok((split.sigma1 as f64 - base_count as f64 / z).abs())
}

/// The dyadic sawtooth sum T_sign(D, L).
pub fn t_sum(d_base: u64, l_base: u64, cfg: &ExponentConfig, sign: Sign) -> Result<TSumResult> {
    if d_base < 1 || l_base < 1 {
        return Err(Error::InvalidConfig("dyadic anchors must be >= 1".into()));
    }
    let gamma = cfg.gamma().clone();
    let n_anchor = d_base
        .checked_pow(3)
        .and_then(|c| c.checked_mul(l_base))
        .ok_or_else(|| {
            Error::CapacityExceeded(format!("anchor D^3 L overflows for D={d_base}, L={l_base}"))
        })?;
    // the largest term base is (2D)^3 * 2L = 16 D^3 L
    n_anchor.checked_mul(16).ok_or_else(|| {
        Error::CapacityExceeded(format!("term range exceeds u64 for D={d_base}, L={l_base}"))
    })?;
    let n_terms = d_base * l_base; // D and L values respectively, product < 16 N

    let base_shift = shift_interval(n_anchor, cfg, sign, TERM_PREC_BITS)?;
    let mut acc = NeumaierSum::new();
    for d in d_base + 1..=2 * d_base {
        for l in l_base + 1..=2 * l_base {
            let m = d * d * d * l;
            acc.add(certified_psi_term(m, n_anchor, cfg, sign, &base_shift)?);
        }
    }
    let value = acc.value();

    let n_f = n_anchor as f64;
    let bound = ((gamma.to_f64() - 2.0 * cfg.eps()) * n_f.ln()).exp();
    Ok(TSumResult {
        d_base,
        l_base,
        gamma,
        sign,
        value,
        n_terms,
        bound,
        ratio: value.abs() / bound,
    })
}

/// The signed shift 4 gamma (D^3 L)^(gamma - 1) as a certified interval
/// of width at most about 2^-prec.
fn shift_interval(
    n_anchor: u64,
    cfg: &ExponentConfig,
    sign: Sign,
    prec: u32,
) -> Result<CertifiedReal> {
    let one = Rational::from_u64(1);
    let gamma_minus_1 = cfg.gamma().sub(&one);
    let four_gamma = Rational::from_u64(4).mul(cfg.gamma());
    // margin so the upcoming multiplication by 4 gamma stays within budget
    let margin = (4.0 * cfg.gamma_f64()).log2().ceil().max(0.0) as u32 + 2;
    let zero = CertifiedReal::from_int(0, prec + margin);
    let base = eval_pow(n_anchor, &gamma_minus_1, &zero, prec + margin)?;
    let shift = base.mul_rational(&four_gamma);
    Ok(match sign {
        Sign::Plus => shift,
        Sign::Minus => shift.neg(),
    })
}

/// One certified sawtooth term psi(m^gamma + shift), escalating precision
/// if the argument cannot be placed on one side of an integer.
fn certified_psi_term(
    m: u64,
    n_anchor: u64,
    cfg: &ExponentConfig,
    sign: Sign,
    base_shift: &CertifiedReal,
) -> Result<f64> {
    let mut prec = TERM_PREC_BITS;
    let mut shift = base_shift.clone();
    loop {
        let attempt = eval_pow(m, cfg.gamma(), &shift, prec).and_then(|arg| psi(&arg));
        match attempt {
            Ok(p) => return Ok(p.to_f64()),
            Err(Error::IndeterminateFloor { .. }) | Err(Error::PrecisionExceeded { .. })
                if prec < TERM_PREC_CAP =>
            {
                prec *= 2;
                shift = shift_interval(n_anchor, cfg, sign, prec)?;
            }
            Err(e) => return Err(e),
        }
    }
}

fn cbrt(v: u64) -> u64 {
    use num_integer::Roots;
    v.nth_root(3)
}
