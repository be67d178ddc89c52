//! Strike by maturity grids: Fourier prices with per-maturity caching, an
//! optional Monte-Carlo column pair, CSV output and plot data.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use fourval::mc::price_mc_grid;
use fourval::pricer::price_strikes;
use fourval::{McConfig, McEstimate, Mode, PriceRequest, Quad};

use crate::config::{GridJob, QuadOverrides};
use crate::{core_exit_code, CliError};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub maturity: f64,
    pub strike: f64,
    pub price: Option<f64>,
    /// Range of the last cap levels when the capped limit did not settle.
    pub band: Option<(f64, f64)>,
    pub mode: Option<Mode>,
    pub converged: bool,
    pub damping: Vec<f64>,
    pub mc: Option<McEstimate>,
    pub error: Option<fourval::Error>,
}

#[derive(Debug, Clone, Default)]
pub struct GridOptions {
    pub quad: QuadOverrides,
    pub no_cache: bool,
    pub oracle: bool,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
}

/// Prices every (maturity, strike) cell, maturity-major.
pub fn run_grid(job: &GridJob, opts: &GridOptions) -> Result<Vec<Row>, CliError> {
    job.validate()?;
    let model = job.model_config()?.build(job.rate, job.dividend)?;
    let payoff = job.payoff.build()?;
    let mut quad = Quad::default();
    opts.quad.merged_over(&job.quad).apply(&mut quad);
    quad.validate()?;
    let base = PriceRequest {
        spot: job.spot.clone(),
        payoff,
        model,
        maturity: job.maturities[0],
        rate: job.rate,
        dividend: job.dividend,
        damping: job.damping.clone(),
        quad,
    };
    let cache = !opts.no_cache;
    let per_maturity: Vec<Vec<Row>> = job
        .maturities
        .par_iter()
        .map(|&t| {
            let mut req = base.clone();
            req.maturity = t;
            match price_strikes(&req, &job.strikes, cache) {
                Ok(results) => results
                    .into_iter()
                    .zip(&job.strikes)
                    .map(|(r, &k)| match r {
                        Ok(p) => {
                            let band = match &p.diagnostics.cap {
                                Some(c) if !p.converged && c.levels.len() >= 3 => {
                                    let tail = &c.levels[c.levels.len() - 3..];
                                    let lo = tail.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
                                    let hi = tail.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
                                    Some((lo, hi))
                                }
                                _ => None,
                            };
                            Row {
                                maturity: t,
                                strike: k,
                                price: Some(p.value),
                                band,
                                mode: Some(p.mode),
                                converged: p.converged,
                                damping: p.damping_used,
                                mc: None,
                                error: None,
                            }
                        }
                        Err(e) => failed_row(t, k, &req, e),
                    })
                    .collect(),
                Err(e) => job.strikes.iter().map(|&k| failed_row(t, k, &req, e.clone())).collect(),
            }
        })
        .collect();
    let mut rows: Vec<Row> = per_maturity.into_iter().flatten().collect();
    if opts.oracle || job.oracle {
        let mut mc = job.mc_config();
        if let Some(p) = opts.paths {
            mc.paths = p;
        }
        if let Some(s) = opts.seed {
            mc.seed = s;
        }
        attach_mc(&mut rows, &base, job, &mc)?;
    }
    Ok(rows)
}

fn failed_row(t: f64, k: f64, req: &PriceRequest<f64>, e: fourval::Error) -> Row {
    Row {
        maturity: t,
        strike: k,
        price: None,
        band: None,
        mode: None,
        converged: false,
        damping: req.damping.clone().unwrap_or_default(),
        mc: None,
        error: Some(e),
    }
}

fn attach_mc(rows: &mut [Row], base: &PriceRequest<f64>, job: &GridJob, cfg: &McConfig) -> Result<(), CliError> {
    let strikes: Vec<Option<f64>> = job.strikes.iter().map(|k| Some(*k)).collect();
    let est = price_mc_grid(base, &strikes, &job.maturities, cfg)?;
    for (row, e) in rows.iter_mut().zip(est.iter().flatten()) {
        row.mc = Some(*e);
    }
    Ok(())
}

/// One line per failed row.
pub fn failure_lines(rows: &[Row]) -> Vec<String> {
    rows.iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("T={} K={}: {e}", r.maturity, r.strike)))
        .collect()
}

/// Error summarising failed rows, if any.
pub fn row_failures(rows: &[Row]) -> Option<CliError> {
    let failed: Vec<&fourval::Error> = rows.iter().filter_map(|r| r.error.as_ref()).collect();
    if failed.is_empty() {
        return None;
    }
    Some(CliError::Rows {
        failed: failed.len(),
        total: rows.len(),
        config: failed.iter().all(|e| core_exit_code(e) == 2),
    })
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), CliError> {
    let with_mc = rows.iter().any(|r| r.mc.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["maturity", "strike", "price", "mode", "converged"];
    if with_mc {
        header.extend(["mc_mean", "mc_stderr"]);
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let price = match (r.price, r.band) {
            (_, Some((lo, hi))) => format!("{lo}:{hi}"),
            (Some(p), None) => p.to_string(),
            (None, None) => String::new(),
        };
        let mut rec = vec![
            r.maturity.to_string(),
            r.strike.to_string(),
            price,
            r.mode.map(|m| m.to_string()).unwrap_or_default(),
            r.converged.to_string(),
        ];
        if with_mc {
            match r.mc {
                Some(e) => rec.extend([e.mean.to_string(), e.std_error.to_string()]),
                None => rec.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Parse(e.to_string())
}

/// `(T, K, price)` triples from grid CSV text; unpriced cells become NaN.
pub fn read_csv_grid(csv_text: &str) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = rd.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Parse(format!("missing column `{name}`")))
    };
    let (it, ik, ip) = (col("maturity")?, col("strike")?, col("price")?);
    let num = |s: &str, what: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::Parse(format!("bad {what} `{s}`")))
    };
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).ok_or_else(|| CliError::Parse("short record".into()));
        let t = num(field(it)?, "maturity")?;
        let k = num(field(ik)?, "strike")?;
        let p = field(ip)?;
        let price = if p.is_empty() || p.contains(':') { f64::NAN } else { num(p, "price")? };
        out.push((t, k, price));
    }
    Ok(out)
}

/// Whitespace-separated `T K price` lines, one blank-line-separated block per
/// maturity, as read by surface plotters.
pub fn emit_plot_data(csv_text: &str) -> Result<String, CliError> {
    let cells = read_csv_grid(csv_text)?;
    let mut s = String::from("# maturity strike price\n");
    let mut prev: Option<f64> = None;
    for (t, k, p) in cells {
        if prev.is_some_and(|q| q != t) {
            s.push('\n');
        }
        prev = Some(t);
        let _ = writeln!(s, "{t} {k} {p}");
    }
    Ok(s)
}

pub fn parse_plot_data(text: &str) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(CliError::Parse(format!("line {}: expected 3 fields", n + 1)));
        }
        let v: Vec<f64> = f
            .iter()
            .map(|x| x.parse::<f64>().map_err(|_| CliError::Parse(format!("line {}: bad number `{x}`", n + 1))))
            .collect::<Result<_, _>>()?;
        out.push((v[0], v[1], v[2]));
    }
    Ok(out)
}
