//! Exact counts of n <= x whose power floor is cube-free, the analytic
//! main terms they are compared against, and least-squares fitting of the
//! empirical error exponent.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::power::{floor_pow, ExponentConfig};
use crate::sieve::{cube_strikes, BaseSet};
use crate::sum::NeumaierSum;

/// Tolerance of the per-process cached zeta(3) value.
const ZETA3_CACHED_TOL: f64 = 1e-14;

/// Default quadrature tolerance for the logarithmic integral.
pub const LI_DEFAULT_TOL: f64 = 1e-10;

/// Work unit for the parallel count sweep.
const COUNT_CHUNK: u64 = 1 << 18;

/// One exact count of { n <= x : n in the base set, floor(n^c) cube-free }
/// next to its predicted main term.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub x: u64,
    pub base_set: BaseSet,
    pub cfg: ExponentConfig,
    pub joint_count: u64,
    pub base_count: u64,
    pub main_term: f64,
    pub abs_error: f64,
    pub normalized_error: f64,
}

/// Least-squares slope of log |error| against log x.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub points: Vec<(u64, f64)>,
    pub fitted_theta: f64,
    pub residual: f64,
}

/// Count the n <= x in the base set whose power floor is cube-free, and
/// attach the main term, base count, and error fields.
pub fn count_joint(x: u64, base_set: BaseSet, cfg: &ExponentConfig) -> Result<CountReport> {
    if x == 0 {
        return Err(Error::InvalidConfig("count_joint needs x >= 1".into()));
    }
    let v_max = floor_pow(x, cfg)?;
    let strikes = cube_strikes(v_max.max(1))?;

    let n_chunks = x.div_ceil(COUNT_CHUNK);
    let joint_count = (0..n_chunks)
        .into_par_iter()
        .map(|ci| -> Result<u64> {
            let lo = 1 + ci * COUNT_CHUNK;
            let hi = (lo + COUNT_CHUNK).min(x + 1);
            let mut cnt = 0u64;
            let mut failed: Option<Error> = None;
            base_set.for_each_in(lo, hi, |n| {
                if failed.is_some() {
                    return;
                }
                match floor_pow(n, cfg) {
                    Ok(v) => {
                        if strikes.is_cubefree(v) {
                            cnt += 1;
                        }
                    }
                    Err(e) => failed = Some(e),
                }
            })?;
            match failed {
                Some(e) => Err(e),
                None => Ok(cnt),
            }
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let base_count = base_set.count(x)?;
    let main_term = main_term(x, base_set, cfg)?;
    let abs_error = (joint_count as f64 - main_term).abs();
    Ok(CountReport {
        x,
        base_set,
        cfg: cfg.clone(),
        joint_count,
        base_count,
        main_term,
        abs_error,
        normalized_error: abs_error / x as f64,
    })
}

/// zeta(3) = sum of 1/n^3 to within tol.
///
/// The partial series is summed with compensation, and the tail past N is
/// replaced by the midpoint of its integral bracket
/// 1/(2(N+1)^2) <= tail <= 1/(2N^2), leaving at most half the bracket
/// width (about 1/(2N^3)) plus rounding. Tolerances at or above the cached
/// resolution are served from a per-process cache.
pub fn zeta3(tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "zeta(3) tolerance must lie in (0, 1), got {tol}"
        )));
    }
    if tol >= ZETA3_CACHED_TOL {
        return Ok(zeta3_cached());
    }
    Ok(zeta3_series(tol))
}

fn zeta3_cached() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| zeta3_series(ZETA3_CACHED_TOL))
}

fn zeta3_series(tol: f64) -> f64 {
    // below ~1e-15 the f64 result itself rounds; tighter requests clamp
    let tol_eff = tol.max(1e-15);
    let n = (1.0 / tol_eff).cbrt().ceil() as u64 + 1;
    let mut acc = NeumaierSum::new();
    for k in 1..=n {
        let kf = k as f64;
        acc.add(1.0 / (kf * kf * kf));
    }
    let tail_lo = 0.5 / (((n + 1) * (n + 1)) as f64);
    let tail_hi = 0.5 / ((n * n) as f64);
    acc.add(0.5 * (tail_lo + tail_hi));
    acc.value()
}

/// Integral of du / log u from 2 to x, by adaptive Simpson quadrature.
pub fn li_from_2(x: f64, tol: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::InvalidConfig(format!(
            "logarithmic integral starts at 2; got upper limit {x}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    if x == 2.0 {
        return Ok(0.0);
    }
    let f = |u: f64| 1.0 / u.ln();
    let (a, b) = (2.0, x);
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    Ok(adapt_simpson(&f, a, b, fa, fm, fb, whole, tol, 60))
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let refined = left + right;
    // the factor 15 is the usual Richardson estimate for Simpson's rule
    if depth == 0 || (refined - whole).abs() <= 15.0 * tol {
        return refined + (refined - whole) / 15.0;
    }
    adapt_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adapt_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// The predicted leading term of the joint count:
/// x / zeta(3) over the naturals, li(x) / zeta(3) over the primes, and
/// x / zeta(3)^2 over the cube-free numbers.
pub fn main_term(x: u64, base_set: BaseSet, _cfg: &ExponentConfig) -> Result<f64> {
    if x == 0 {
        return Err(Error::InvalidConfig("main term needs x >= 1".into()));
    }
    let z = zeta3(ZETA3_CACHED_TOL)?;
    Ok(match base_set {
        BaseSet::Naturals => x as f64 / z,
        BaseSet::Primes => {
            if x <= 2 {
                0.0
            } else {
                li_from_2(x as f64, LI_DEFAULT_TOL)? / z
            }
        }
        BaseSet::Cubefree => x as f64 / (z * z),
    })
}

/// Fit log |error| = theta * log x + const by least squares, dropping
/// zero-error points (the bound concerns magnitudes only).
pub fn error_fit(points: &[(u64, f64)]) -> Result<FitReport> {
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::InvalidConfig(
                "fit points must have strictly increasing x".into(),
            ));
        }
    }
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| e.abs() > 0.0)
        .map(|&(x, e)| ((x as f64).ln(), e.abs().ln()))
        .collect();
    if data.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "error-exponent fit needs at least 3 nonzero-error points, got {}",
            data.len()
        )));
    }
    let n = data.len() as f64;
    let mean_x = data.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = data.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = data.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = data.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = data
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    Ok(FitReport {
        points: points.to_vec(),
        fitted_theta: slope,
        residual: (ss_res / n).sqrt(),
    })
}
