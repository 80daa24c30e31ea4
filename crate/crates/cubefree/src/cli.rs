//! Command-line front end: argument parsing, worker-pool setup, and the
//! dispatch from subcommands to library calls and report rows.
//!
//! All diagnostics go to stderr; stdout (or the `--output` file) carries
//! nothing but report rows. A fixed configuration and seed produce
//! byte-identical reports, so reruns can be diffed directly.

use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use crate::counting::{count_joint, error_fit, CountReport};
use crate::decomp::{sigma_split, t_sum, Sign};
use crate::error::{Error, Result};
use crate::expsum::{condition2_scan, s_alpha, s_hdl, RationalPhase};
use crate::power::ExponentConfig;
use crate::psi_approx::{
    buriev_coeffs, buriev_residual, fold_points, hb_g, hb_truncated, sawtooth, standard_grid,
    vaaler_coeffs, vaaler_residual, BURIEV_RATIO_CAP, HB_RATIO_CAP, VAALER_RATIO_CAP,
};
use crate::report::{
    read_fit_points, write_rows, Condition2ScanRow, CountRow, ExpsumRow, FitRow, Format, LemmaRow,
    ScanRow, SigmaRow, TsumRow,
};
use crate::sieve::BaseSet;

/// Environment variable consulted for the worker-pool size when
/// `--threads` is not given.
pub const THREADS_ENV: &str = "CUBEFREE_THREADS";

/// Minimum growth factor of a geometric x-ladder.
const MIN_LADDER_FACTOR: f64 = 1.7782794100389228; // 10^(1/4)

#[derive(Parser, Debug)]
#[command(
    name = "cubefree",
    version,
    about = "Distribution of cube-free values of rounded powers: counts, sum decompositions, exponential sums, and approximation residuals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Report encoding: csv or json.
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    pub format: Format,

    /// Worker threads (overrides the CUBEFREE_THREADS environment variable).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for the jittered evaluation grids of `lemmas`.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ExponentArgs {
    /// Exponent c, as a fraction (3/2) or an exact decimal (1.5).
    #[arg(long, default_value = "3/2")]
    pub c: String,

    /// Cutoff exponent for the d <= x^eps split.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Margin exponent carried into derived bounds.
    #[arg(long)]
    pub eta: Option<f64>,
}

impl ExponentArgs {
    pub fn build(&self) -> Result<ExponentConfig> {
        let mut cfg = ExponentConfig::from_c_str(&self.c)?;
        if let Some(eps) = self.eps {
            cfg = cfg.with_eps(eps)?;
        }
        if let Some(eta) = self.eta {
            cfg = cfg.with_eta(eta)?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count base-set members n <= x whose rounded power is cube-free.
    Count {
        #[command(flatten)]
        exponent: ExponentArgs,
        /// Base set: naturals, primes, or cubefree.
        #[arg(long, default_value = "naturals")]
        set: String,
        /// Evaluation point (scientific notation accepted); repeatable.
        #[arg(long, required = true)]
        x: Vec<String>,
    },

    /// Count along a geometric ladder of x and fit the error-growth exponent.
    Scan {
        #[command(flatten)]
        exponent: ExponentArgs,
        #[arg(long, default_value = "naturals")]
        set: String,
        /// First ladder point.
        #[arg(long)]
        x_from: String,
        /// Last ladder point (inclusive up to rounding).
        #[arg(long)]
        x_to: String,
        /// Ladder growth factor, at least 10^(1/4).
        #[arg(long, default_value_t = 10.0)]
        factor: f64,
    },

    /// Split the cube-free indicator sum at the d <= x^eps cutoff.
    Sigma {
        #[command(flatten)]
        exponent: ExponentArgs,
        #[arg(long, default_value = "naturals")]
        set: String,
        #[arg(long, required = true)]
        x: Vec<String>,
    },

    /// Evaluate the shifted sawtooth double sum over dyadic boxes.
    Tsum {
        #[command(flatten)]
        exponent: ExponentArgs,
        /// Dyadic anchor of the cube variable: d runs over (D, 2D].
        #[arg(long, visible_alias = "D")]
        d: u64,
        /// Dyadic anchor of the linear variable: l runs over (L, 2L].
        #[arg(long, visible_alias = "L")]
        l: u64,
        /// Shift direction, + or -.
        #[arg(long, default_value = "+")]
        sign: String,
    },

    /// Exponential sums: a rational phase over a base set (--a/--q with
    /// --x), the triple sum over dyadic boxes (--h/--d/--l), or the
    /// phase-ladder scan (--q-max with repeated --x).
    Expsum {
        #[command(flatten)]
        exponent: ExponentArgs,
        #[arg(long, default_value = "naturals")]
        set: String,
        /// Evaluation point(s) for the single sum or the phase scan.
        #[arg(long)]
        x: Vec<String>,
        /// Phase numerator (0 selects the zero phase).
        #[arg(long)]
        a: Option<u64>,
        /// Phase denominator.
        #[arg(long)]
        q: Option<u64>,
        /// Dyadic anchor of the outer variable.
        #[arg(long, visible_alias = "H")]
        h: Option<u64>,
        /// Dyadic anchor of the cube variable.
        #[arg(long, visible_alias = "D")]
        d: Option<u64>,
        /// Dyadic anchor of the linear variable.
        #[arg(long, visible_alias = "L")]
        l: Option<u64>,
        /// Scan all reduced phases a/q with q up to this bound.
        #[arg(long)]
        q_max: Option<u64>,
    },

    /// Scan an approximation's residuals against its majorant and the
    /// frozen calibration cap.
    Lemmas {
        /// Which approximation: vaaler, hb, or buriev.
        #[arg(long)]
        which: String,
        /// Degree (vaaler) or expansion length (hb, buriev).
        #[arg(long, default_value_t = 10, visible_alias = "H", visible_alias = "J")]
        h: u64,
        /// Expansion parameter for buriev, in (0, 1).
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Emit only the summary row, skipping the per-point grid.
        #[arg(long)]
        summary_only: bool,
    },

    /// Fit a power law to (x, error) points from a CSV file.
    Fit {
        /// CSV file with an `x` column and an `abs_error` or `error`
        /// column; a scan report works as-is.
        #[arg(long)]
        input: PathBuf,
    },
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    Format::from_str(s).map_err(|e| e.to_string())
}

/// Parse an evaluation point, accepting plain integers and scientific
/// notation that lands exactly on an integer (1e6, 2.5e3).
pub fn parse_x(s: &str) -> Result<u64> {
    let v = crate::rational::parse_scale(s)?;
    if v < 1 {
        return Err(Error::InvalidConfig("x must be at least 1".into()));
    }
    Ok(v)
}

fn parse_x_list(list: &[String]) -> Result<Vec<u64>> {
    list.iter().map(|s| parse_x(s)).collect()
}

/// Expand a geometric ladder from `from` to `to` with the given factor.
fn geometric_ladder(from: u64, to: u64, factor: f64) -> Result<Vec<u64>> {
    if from > to {
        return Err(Error::InvalidConfig(format!(
            "ladder start {from} exceeds its end {to}"
        )));
    }
    if !(factor >= MIN_LADDER_FACTOR) {
        return Err(Error::InvalidConfig(format!(
            "ladder factor must be at least 10^(1/4) = {MIN_LADDER_FACTOR:.4}, got {factor}"
        )));
    }
    let mut xs = Vec::new();
    let mut cur = from as f64;
    // a hair of slack so that from * factor^k recovers `to` despite rounding
    while cur <= to as f64 * (1.0 + 1e-9) {
        let x = cur.round() as u64;
        if xs.last() == Some(&x) {
            return Err(Error::InvalidConfig(
                "ladder factor too small to separate consecutive integer points".into(),
            ));
        }
        xs.push(x.min(to));
        cur *= factor;
    }
    Ok(xs)
}

fn resolve_threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
    })
}

/// Top-level entry: size the worker pool, open the output, run the
/// command. Errors map to exit codes via `Error::exit_code`.
pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = resolve_threads(cli.threads) {
        if n == 0 {
            return Err(Error::InvalidConfig("thread count must be at least 1".into()));
        }
        // a second initialization in the same process keeps the first
        // pool; that is fine for repeated in-process runs
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                Error::InvalidConfig(format!("cannot create {}: {e}", path.display()))
            })?;
            let mut out = BufWriter::new(file);
            run_to_writer(cli, &mut out)?;
            out.flush()
                .map_err(|e| Error::InvalidConfig(format!("cannot flush output: {e}")))
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            run_to_writer(cli, &mut out)
        }
    }
}

/// Command dispatch writing rows to an arbitrary sink (test seam).
pub fn run_to_writer(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Count { exponent, set, x } => {
            let cfg = exponent.build()?;
            let set: BaseSet = set.parse()?;
            let rows = parse_x_list(x)?
                .into_iter()
                .map(|x| Ok(CountRow::from_report(&count_joint(x, set, &cfg)?)))
                .collect::<Result<Vec<_>>>()?;
            write_rows(&rows, cli.format, out)
        }
        Command::Scan {
            exponent,
            set,
            x_from,
            x_to,
            factor,
        } => {
            let cfg = exponent.build()?;
            let set: BaseSet = set.parse()?;
            let ladder = geometric_ladder(parse_x(x_from)?, parse_x(x_to)?, *factor)?;
            let reports = ladder
                .into_iter()
                .map(|x| count_joint(x, set, &cfg))
                .collect::<Result<Vec<CountReport>>>()?;
            let points: Vec<(u64, f64)> = reports.iter().map(|r| (r.x, r.abs_error)).collect();
            let fit = error_fit(&points)?;
            let mut rows: Vec<ScanRow> = reports.iter().map(ScanRow::from_count).collect();
            rows.push(ScanRow::from_fit(&fit, &cfg, set));
            write_rows(&rows, cli.format, out)
        }
        Command::Sigma { exponent, set, x } => {
            let cfg = exponent.build()?;
            let set: BaseSet = set.parse()?;
            let rows = parse_x_list(x)?
                .into_iter()
                .map(|x| Ok(SigmaRow::from_split(&sigma_split(x, &cfg, set)?)))
                .collect::<Result<Vec<_>>>()?;
            write_rows(&rows, cli.format, out)
        }
        Command::Tsum {
            exponent,
            d,
            l,
            sign,
        } => {
            let cfg = exponent.build()?;
            let sign: Sign = sign.parse()?;
            let rows = [TsumRow::from_result(&t_sum(*d, *l, &cfg, sign)?, &cfg)];
            write_rows(&rows, cli.format, out)
        }
        Command::Expsum {
            exponent,
            set,
            x,
            a,
            q,
            h,
            d,
            l,
            q_max,
        } => run_expsum(cli, out, exponent, set, x, *a, *q, *h, *d, *l, *q_max),
        Command::Lemmas {
            which,
            h,
            alpha,
            summary_only,
        } => run_lemmas(cli, out, which, *h, *alpha, *summary_only),
        Command::Fit { input } => {
            let file = File::open(input).map_err(|e| {
                Error::InvalidConfig(format!("cannot open {}: {e}", input.display()))
            })?;
            let points = read_fit_points(file)?;
            let fit = error_fit(&points)?;
            let rows = [FitRow::from_report(&fit, &input.display().to_string())];
            write_rows(&rows, cli.format, out)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_expsum(
    cli: &Cli,
    out: &mut dyn Write,
    exponent: &ExponentArgs,
    set: &str,
    x: &[String],
    a: Option<u64>,
    q: Option<u64>,
    h: Option<u64>,
    d: Option<u64>,
    l: Option<u64>,
    q_max: Option<u64>,
) -> Result<()> {
    let cfg = exponent.build()?;
    let set: BaseSet = set.parse()?;
    match (q_max, q, h) {
        (Some(q_max), None, None) => {
            let xs = parse_x_list(x)?;
            let scan = condition2_scan(set, &cfg, &xs, q_max)?;
            let rows: Vec<Condition2ScanRow> = scan
                .iter()
                .map(|r| Condition2ScanRow::from_row(r, &cfg, set, q_max))
                .collect();
            write_rows(&rows, cli.format, out)
        }
        (None, Some(q), None) => {
            let a = a.unwrap_or(1);
            let phase = if a % q == 0 {
                RationalPhase::zero()
            } else {
                RationalPhase::new(a % q, q)?
            };
            let rows = parse_x_list(x)?
                .into_iter()
                .map(|x| {
                    let r = s_alpha(x, set, &phase, &cfg)?;
                    Ok(ExpsumRow::from_single(&r, &cfg, set, x, &phase))
                })
                .collect::<Result<Vec<_>>>()?;
            if rows.is_empty() {
                return Err(Error::InvalidConfig(
                    "the single phase sum needs at least one --x".into(),
                ));
            }
            write_rows(&rows, cli.format, out)
        }
        (None, None, Some(h)) => {
            let (d, l) = match (d, l) {
                (Some(d), Some(l)) => (d, l),
                _ => {
                    return Err(Error::InvalidConfig(
                        "the triple sum needs --h, --d and --l together".into(),
                    ))
                }
            };
            let r = s_hdl(h, d, l, &cfg)?;
            let rows = [ExpsumRow::from_triple(&r, &cfg, h, d, l)];
            write_rows(&rows, cli.format, out)
        }
        _ => Err(Error::InvalidConfig(
            "choose one mode: --a/--q with --x, or --h/--d/--l, or --q-max with --x".into(),
        )),
    }
}

fn run_lemmas(
    cli: &Cli,
    out: &mut dyn Write,
    which: &str,
    scale: u64,
    alpha: f64,
    summary_only: bool,
) -> Result<()> {
    let grid = standard_grid(cli.seed);
    // (point, error, majorant) rows plus the cap the summary is checked
    // against; the hb grid drops the 1/(2H)-neighborhoods of 0 and 1
    let (name, alpha_echo, cap, rows): (&str, Option<f64>, f64, Vec<(f64, f64, f64)>) =
        match which.to_ascii_lowercase().as_str() {
            "vaaler" => {
                let coeffs = vaaler_coeffs(scale)?;
                let rows = grid
                    .iter()
                    .map(|&t| {
                        let (err, major) = vaaler_residual(t, &coeffs);
                        (t, err, major)
                    })
                    .collect();
                ("vaaler", None, VAALER_RATIO_CAP, rows)
            }
            "hb" | "heath-brown" => {
                if scale < 1 {
                    return Err(Error::InvalidConfig("expansion length must be >= 1".into()));
                }
                let margin = 1.0 / (2.0 * scale as f64);
                let rows = grid
                    .iter()
                    .filter(|&&t| t >= margin && t <= 1.0 - margin)
                    .map(|&t| {
                        let err = (sawtooth(t) - hb_truncated(t, scale)?).abs();
                        Ok((t, err, hb_g(t, scale)))
                    })
                    .collect::<Result<_>>()?;
                ("hb", None, HB_RATIO_CAP, rows)
            }
            "buriev" => {
                let coeffs = buriev_coeffs(alpha, scale)?;
                let rows = grid
                    .iter()
                    .map(|&y| {
                        let (_, residual, majorant) = buriev_residual(y, &coeffs)?;
                        Ok((y, residual, majorant))
                    })
                    .collect::<Result<_>>()?;
                ("buriev", Some(alpha), BURIEV_RATIO_CAP, rows)
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown approximation {other:?}, expected vaaler, hb, or buriev"
                )))
            }
        };
    let scan = fold_points(&rows);
    let mut report: Vec<LemmaRow> = Vec::new();
    if !summary_only {
        report.extend(
            rows.iter()
                .map(|&(t, err, major)| LemmaRow::point(name, scale, alpha_echo, cli.seed, t, err, major)),
        );
    }
    report.push(LemmaRow::summary(name, scale, alpha_echo, cli.seed, &scan, cap));
    write_rows(&report, cli.format, out)
}
