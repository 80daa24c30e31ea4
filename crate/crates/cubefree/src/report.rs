//! Flat report rows and the CSV/JSON writers behind the command-line
//! interface.
//!
//! Every row carries the full parameter echo alongside its results, so a
//! report line can be traced back to (and re-run from) the exact
//! configuration that produced it. Column order is the struct field
//! order and is part of the output contract; floats are printed in
//! shortest round-trip form, which keeps byte-identical reruns cheap to
//! verify.

use serde::Serialize;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::counting::{CountReport, FitReport};
use crate::decomp::{SigmaSplit, TSumResult};
use crate::error::{Error, Result};
use crate::expsum::{Condition2Row, RationalPhase, SumResult};
use crate::power::{ExponentConfig, Mode};
use crate::psi_approx::ResidualScan;
use crate::sieve::BaseSet;

/// Output encoding for report rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown output format {other:?}, expected csv or json"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

fn mode_label(cfg: &ExponentConfig) -> &'static str {
    match cfg.mode() {
        Mode::Theorem => "theorem",
        Mode::Exploratory => "exploratory",
    }
}

/// One row of the `count` command.
#[derive(Debug, Clone, Serialize)]
pub struct CountRow {
    pub command: &'static str,
    pub c: String,
    pub mode: &'static str,
    pub eps: f64,
    pub eta: f64,
    pub set: String,
    pub x: u64,
    pub joint_count: u64,
    pub base_count: u64,
    pub main_term: f64,
    pub abs_error: f64,
    pub normalized_error: f64,
}

impl CountRow {
    pub fn from_report(r: &CountReport) -> Self {
        CountRow {
            command: "count",
            c: r.cfg.c().to_string(),
            mode: mode_label(&r.cfg),
            eps: r.cfg.eps(),
            eta: r.cfg.eta(),
            set: r.base_set.to_string(),
            x: r.x,
            joint_count: r.joint_count,
            base_count: r.base_count,
            main_term: r.main_term,
            abs_error: r.abs_error,
            normalized_error: r.normalized_error,
        }
    }
}

/// One row of the `scan` command: per-x count rows (`row = "count"`)
/// followed by a single footer (`row = "fit"`) whose only filled columns
/// are the fitted exponent, its residual and the point count.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub command: &'static str,
    pub row: &'static str,
    pub c: String,
    pub mode: &'static str,
    pub eps: f64,
    pub eta: f64,
    pub set: String,
    pub x: Option<u64>,
    pub joint_count: Option<u64>,
    pub base_count: Option<u64>,
    pub main_term: Option<f64>,
    pub abs_error: Option<f64>,
    pub normalized_error: Option<f64>,
    pub fitted_theta: Option<f64>,
    pub fit_residual: Option<f64>,
    pub fit_points: Option<usize>,
}

impl ScanRow {
    pub fn from_count(r: &CountReport) -> Self {
        ScanRow {
            command: "scan",
            row: "count",
            c: r.cfg.c().to_string(),
            mode: mode_label(&r.cfg),
            eps: r.cfg.eps(),
            eta: r.cfg.eta(),
            set: r.base_set.to_string(),
            x: Some(r.x),
            joint_count: Some(r.joint_count),
            base_count: Some(r.base_count),
            main_term: Some(r.main_term),
            abs_error: Some(r.abs_error),
            normalized_error: Some(r.normalized_error),
            fitted_theta: None,
            fit_residual: None,
            fit_points: None,
        }
    }

    pub fn from_fit(fit: &FitReport, cfg: &ExponentConfig, set: BaseSet) -> Self {
        ScanRow {
            command: "scan",
            row: "fit",
            c: cfg.c().to_string(),
            mode: mode_label(cfg),
            eps: cfg.eps(),
            eta: cfg.eta(),
            set: set.to_string(),
            x: None,
            joint_count: None,
            base_count: None,
            main_term: None,
            abs_error: None,
            normalized_error: None,
            fitted_theta: Some(fit.fitted_theta),
            fit_residual: Some(fit.residual),
            fit_points: Some(fit.points.len()),
        }
    }
}

/// One row of the `sigma` command.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaRow {
    pub command: &'static str,
    pub c: String,
    pub mode: &'static str,
    pub eps: f64,
    pub eta: f64,
    pub set: String,
    pub x: u64,
    pub cutoff: u64,
    pub sigma1: i64,
    pub sigma2: i64,
    pub check_total: u64,
}

impl SigmaRow {
    pub fn from_split(s: &SigmaSplit) -> Self {
        SigmaRow {
            command: "sigma",
            c: s.cfg.c().to_string(),
            mode: mode_label(&s.cfg),
            eps: s.cfg.eps(),
            eta: s.cfg.eta(),
            set: s.base_set.to_string(),
            x: s.x,
            cutoff: s.cfg.eps_cutoff(s.x),
            sigma1: s.sigma1,
            sigma2: s.sigma2,
            check_total: s.check_total,
        }
    }
}

/// One row of the `tsum` command.
#[derive(Debug, Clone, Serialize)]
pub struct TsumRow {
    pub command: &'static str,
    pub c: String,
    pub eps: f64,
    pub sign: String,
    pub d: u64,
    pub l: u64,
    pub n_anchor: u64,
    pub n_terms: u64,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

impl TsumRow {
    pub fn from_result(t: &TSumResult, cfg: &ExponentConfig) -> Self {
        TsumRow {
            command: "tsum",
            c: cfg.c().to_string(),
            eps: cfg.eps(),
            sign: t.sign.to_string(),
            d: t.d_base,
            l: t.l_base,
            n_anchor: t.d_base.pow(3) * t.l_base,
            n_terms: t.n_terms,
            value: t.value,
            bound: t.bound,
            ratio: t.ratio,
        }
    }
}

/// One row of the `expsum` command, covering both the single phase sum
/// over a base set (kind = "single", columns x/a/q filled) and the
/// triple sum over dyadic boxes (kind = "triple", columns h/d/l filled).
#[derive(Debug, Clone, Serialize)]
pub struct ExpsumRow {
    pub command: &'static str,
    pub kind: &'static str,
    pub c: String,
    pub mode: &'static str,
    pub eps: f64,
    pub set: Option<String>,
    pub x: Option<u64>,
    pub a: Option<u64>,
    pub q: Option<u64>,
    pub h: Option<u64>,
    pub d: Option<u64>,
    pub l: Option<u64>,
    pub value_re: f64,
    pub value_im: f64,
    pub modulus: f64,
    pub n_terms: u64,
    pub bound_kind: Option<String>,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
}

impl ExpsumRow {
    pub fn from_single(
        r: &SumResult,
        cfg: &ExponentConfig,
        set: BaseSet,
        x: u64,
        phase: &RationalPhase,
    ) -> Self {
        ExpsumRow {
            command: "expsum",
            kind: "single",
            c: cfg.c().to_string(),
            mode: mode_label(cfg),
            eps: cfg.eps(),
            set: Some(set.to_string()),
            x: Some(x),
            a: Some(phase.a()),
            q: Some(phase.q()),
            h: None,
            d: None,
            l: None,
            value_re: r.value.re,
            value_im: r.value.im,
            modulus: r.modulus,
            n_terms: r.n_terms,
            bound_kind: r.bound.as_ref().map(|b| b.kind.to_string()),
            bound: r.bound.as_ref().map(|b| b.value),
            ratio: r.ratio,
        }
    }

    pub fn from_triple(r: &SumResult, cfg: &ExponentConfig, h: u64, d: u64, l: u64) -> Self {
        ExpsumRow {
            command: "expsum",
            kind: "triple",
            c: cfg.c().to_string(),
            mode: mode_label(cfg),
            eps: cfg.eps(),
            set: None,
            x: None,
            a: None,
            q: None,
            h: Some(h),
            d: Some(d),
            l: Some(l),
            value_re: r.value.re,
            value_im: r.value.im,
            modulus: r.modulus,
            n_terms: r.n_terms,
            bound_kind: r.bound.as_ref().map(|b| b.kind.to_string()),
            bound: r.bound.as_ref().map(|b| b.value),
            ratio: r.ratio,
        }
    }
}

/// One row of the phase-ladder scan inside the `expsum` command.
#[derive(Debug, Clone, Serialize)]
pub struct Condition2ScanRow {
    pub command: &'static str,
    pub kind: &'static str,
    pub c: String,
    pub set: String,
    pub q_max: u64,
    pub x: u64,
    pub n_phases: u64,
    pub max_ratio: f64,
    pub max_modulus: f64,
    pub argmax_a: u64,
    pub argmax_q: u64,
}

impl Condition2ScanRow {
    pub fn from_row(r: &Condition2Row, cfg: &ExponentConfig, set: BaseSet, q_max: u64) -> Self {
        Condition2ScanRow {
            command: "expsum",
            kind: "phase-scan",
            c: cfg.c().to_string(),
            set: set.to_string(),
            q_max,
            x: r.x,
            n_phases: r.n_phases,
            max_ratio: r.max_ratio,
            max_modulus: r.max_modulus,
            argmax_a: r.argmax_a,
            argmax_q: r.argmax_q,
        }
    }
}

/// One row of the `lemmas` command: per-grid-point rows (`row = "point"`)
/// followed by one summary (`row = "summary"`) carrying the scan maxima
/// and the frozen-cap verdict.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaRow {
    pub command: &'static str,
    pub which: String,
    pub scale: u64,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub row: &'static str,
    pub t: Option<f64>,
    pub error: Option<f64>,
    pub majorant: Option<f64>,
    pub n_points: Option<usize>,
    pub max_error: Option<f64>,
    pub max_ratio: Option<f64>,
    pub argmax_t: Option<f64>,
    pub frozen_cap: Option<f64>,
    pub pass: Option<bool>,
}

impl LemmaRow {
    pub fn point(
        which: &str,
        scale: u64,
        alpha: Option<f64>,
        seed: u64,
        t: f64,
        error: f64,
        majorant: f64,
    ) -> Self {
        LemmaRow {
            command: "lemmas",
            which: which.to_string(),
            scale,
            alpha,
            seed,
            row: "point",
            t: Some(t),
            error: Some(error),
            majorant: Some(majorant),
            n_points: None,
            max_error: None,
            max_ratio: None,
            argmax_t: None,
            frozen_cap: None,
            pass: None,
        }
    }

    pub fn summary(
        which: &str,
        scale: u64,
        alpha: Option<f64>,
        seed: u64,
        scan: &ResidualScan,
        frozen_cap: f64,
    ) -> Self {
        LemmaRow {
            command: "lemmas",
            which: which.to_string(),
            scale,
            alpha,
            seed,
            row: "summary",
            t: None,
            error: None,
            majorant: None,
            n_points: Some(scan.n_points),
            max_error: Some(scan.max_error),
            max_ratio: Some(scan.max_ratio),
            argmax_t: Some(scan.argmax_t),
            frozen_cap: Some(frozen_cap),
            pass: Some(scan.max_ratio <= frozen_cap),
        }
    }
}

/// One row of the `fit` command.
#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    pub command: &'static str,
    pub source: String,
    pub n_points: usize,
    pub fitted_theta: f64,
    pub residual: f64,
}

impl FitRow {
    pub fn from_report(fit: &FitReport, source: &str) -> Self {
        FitRow {
            command: "fit",
            source: source.to_string(),
            n_points: fit.points.len(),
            fitted_theta: fit.fitted_theta,
            residual: fit.residual,
        }
    }
}

fn write_error(e: impl fmt::Display) -> Error {
    Error::InvalidConfig(format!("cannot write report: {e}"))
}

/// Read (x, error) points for the power-law fit from a CSV stream.
///
/// The file must carry headers; the fit takes its abscissa from the `x`
/// column and its ordinate from `abs_error` (falling back to `error`),
/// so the output of a `scan` run can be fed back verbatim. Rows whose
/// `x` field is empty (such as a scan's fit footer) are skipped. Never
/// panics on malformed input — every defect maps to an error value.
pub fn read_fit_points(input: impl std::io::Read) -> Result<Vec<(u64, f64)>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidConfig(format!("cannot read CSV header: {e}")))?;
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let x_col = find("x").ok_or_else(|| {
        Error::InvalidConfig("fit input needs an `x` column in its header".into())
    })?;
    let err_col = find("abs_error").or_else(|| find("error")).ok_or_else(|| {
        Error::InvalidConfig("fit input needs an `abs_error` or `error` column".into())
    })?;
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| Error::InvalidConfig(format!("bad CSV record on line {}: {e}", i + 2)))?;
        let x_field = record.get(x_col).unwrap_or("").trim();
        if x_field.is_empty() {
            continue;
        }
        let x: u64 = x_field.parse().map_err(|_| {
            Error::InvalidConfig(format!("line {}: x value {x_field:?} is not an integer", i + 2))
        })?;
        let e_field = record.get(err_col).unwrap_or("").trim();
        let err: f64 = e_field.parse().map_err(|_| {
            Error::InvalidConfig(format!("line {}: error value {e_field:?} is not a number", i + 2))
        })?;
        if !err.is_finite() || err < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "line {}: error value {err} must be finite and nonnegative",
                i + 2
            )));
        }
        points.push((x, err));
    }
    Ok(points)
}

/// Serialize rows in the chosen format. CSV gets a header line derived
/// from the field names and standard quoting; JSON is a single
/// top-level array of row objects.
pub fn write_rows<T: Serialize>(rows: &[T], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for row in rows {
                w.serialize(row).map_err(write_error)?;
            }
            w.flush().map_err(write_error)?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows).map_err(write_error)?;
            out.write_all(b"\n").map_err(write_error)?;
        }
    }
    Ok(())
}
