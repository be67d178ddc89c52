use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fourval::mc::price_mc;
use fourval::pricer::{delta, gamma, price};
use fourval::quadrature::{pinsky_cap_result, pinsky_spherical_demo};
use fourval::{McConfig, PayoffSpec, PriceRequest, Quad};
use fourval_cli::bench::bench_decay_demo;
use fourval_cli::config::{json_arg, parse_model, parse_payoff, GridJob, QuadOverrides};
use fourval_cli::grid::{emit_plot_data, failure_lines, row_failures, run_grid, write_csv, GridOptions, Row};
use fourval_cli::CliError;

#[derive(Parser)]
#[command(name = "fourval", version, about = "Fourier-inversion option pricing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price a single contract.
    Price(SingleArgs),
    /// Price a strike by maturity grid from a job file.
    Grid(GridArgs),
    /// Delta and gamma of a single-asset contract.
    Greeks(SingleArgs),
    /// Compare direct call pricing with the asset-or-nothing minus digital split.
    BenchDecay,
    /// Capped spherical inversion of the unit-ball indicator in three dimensions.
    PinskyDemo,
}

#[derive(Args)]
struct QuadArgs {
    /// Absolute and relative quadrature tolerance.
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Node budget per one-dimensional integration.
    #[arg(long)]
    quad_max_nodes: Option<usize>,
    /// First cap of the capped-integral schedule.
    #[arg(long)]
    cap_initial: Option<f64>,
    /// Number of cap doublings.
    #[arg(long)]
    cap_max_doublings: Option<usize>,
}

impl QuadArgs {
    fn overrides(&self) -> QuadOverrides {
        QuadOverrides {
            tol: self.quad_tol,
            max_nodes: self.quad_max_nodes,
            cap_initial: self.cap_initial,
            cap_max_doublings: self.cap_max_doublings,
        }
    }
}

#[derive(Args)]
struct McArgs {
    /// Also run the Monte-Carlo oracle.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SingleArgs {
    /// Model as inline JSON or a path to a JSON file.
    #[arg(long)]
    model: String,
    /// Payoff as inline JSON or a path to a JSON file.
    #[arg(long)]
    payoff: String,
    /// Spot prices, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    spot: Vec<f64>,
    #[arg(long)]
    maturity: f64,
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    #[arg(long, default_value_t = 0.0)]
    dividend: f64,
    /// Damping vector, comma separated; chosen automatically when absent.
    #[arg(long, value_delimiter = ',')]
    damping: Option<Vec<f64>>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct GridArgs {
    /// Job file (JSON).
    #[arg(long)]
    job: PathBuf,
    /// CSV destination; defaults to the job's `output`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write plot data here.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Evaluate the characteristic function separately for every strike.
    #[arg(long)]
    no_cache: bool,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    mc: McArgs,
}

fn request(a: &SingleArgs) -> Result<PriceRequest<f64>, CliError> {
    let model = parse_model(&json_arg(&a.model)?)?.build(a.rate, a.dividend)?;
    let payoff = parse_payoff(&json_arg(&a.payoff)?)?.build()?;
    let mut quad = Quad::default();
    a.quad.overrides().apply(&mut quad);
    Ok(PriceRequest {
        spot: a.spot.clone(),
        payoff,
        model,
        maturity: a.maturity,
        rate: a.rate,
        dividend: a.dividend,
        damping: a.damping.clone(),
        quad,
    })
}

/// Strike or barrier shown in the output row; the first one for products.
fn level(p: &PayoffSpec) -> f64 {
    use fourval::payoffs::PayoffSpec as P;
    match p {
        P::Call { strike }
        | P::Put { strike }
        | P::SelfQuantoCall { strike }
        | P::PowerCall2 { strike }
        | P::MinCall { strike, .. }
        | P::MaxPut { strike, .. } => *strike,
        P::DigitalCall { barrier } | P::DigitalPut { barrier } | P::AssetOrNothingCall { barrier } => *barrier,
        P::DoubleDigital { low, .. } => *low,
        P::Product(f) => f.first().map_or(f64::NAN, level),
    }
}

fn cmd_price(a: &SingleArgs) -> Result<(), CliError> {
    let req = request(a)?;
    let strike = level(&req.payoff);
    let res = price(&req)?;
    let mc = if a.mc.oracle {
        let mut cfg = McConfig::default();
        cfg.paths = a.mc.paths.unwrap_or(cfg.paths);
        cfg.seed = a.mc.seed.unwrap_or(cfg.seed);
        Some(price_mc(&req, &cfg)?)
    } else {
        None
    };
    let band = res.diagnostics.cap.as_ref().filter(|_| !res.converged).map(|c| {
        let v = c.value.re;
        (v - c.oscillation_amplitude, v + c.oscillation_amplitude)
    });
    let row = Row {
        maturity: req.maturity,
        strike,
        price: Some(res.value),
        band,
        mode: Some(res.mode),
        converged: res.converged,
        damping: res.damping_used,
        mc,
        error: None,
    };
    write_csv(&[row], io::stdout().lock())
}

fn cmd_greeks(a: &SingleArgs) -> Result<(), CliError> {
    let req = request(a)?;
    let d = delta(&req)?;
    let g = gamma(&req)?;
    println!("delta,gamma\n{d},{g}");
    Ok(())
}

fn cmd_grid(a: &GridArgs) -> Result<(), CliError> {
    let job = GridJob::load(&a.job)?;
    let opts = GridOptions {
        quad: a.quad.overrides(),
        no_cache: a.no_cache,
        oracle: a.mc.oracle,
        paths: a.mc.paths,
        seed: a.mc.seed,
    };
    let rows = run_grid(&job, &opts)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    match a.out.as_ref().or(job.output.as_ref()) {
        Some(p) => File::create(p)?.write_all(&buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    if let Some(p) = &a.plot {
        let text = String::from_utf8(buf).map_err(|e| CliError::Parse(e.to_string()))?;
        std::fs::write(p, emit_plot_data(&text)?)?;
    }
    for line in failure_lines(&rows) {
        eprintln!("{line}");
    }
    match row_failures(&rows) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn cmd_bench() -> Result<(), CliError> {
    let r = bench_decay_demo()?;
    println!("cells            {}", r.cells);
    println!("direct nodes     {} ({:.3} s)", r.direct_nodes, r.direct_seconds);
    println!("split nodes      {} ({:.3} s)", r.split_nodes, r.split_seconds);
    println!("node ratio       {:.3}", r.split_nodes as f64 / r.direct_nodes as f64);
    println!("max |difference| {:.3e}", r.max_difference);
    println!("decay exponents  call {:.3}, asset-or-nothing {:.3}, digital {:.3}", r.call_decay, r.aon_decay, r.digital_decay);
    if !r.split_needs_more_nodes() {
        return Err(CliError::Core(fourval::Error::Numerical(
            "split path did not use more nodes than the direct path".into(),
        )));
    }
    Ok(())
}

fn cmd_pinsky() -> Result<(), CliError> {
    use std::f64::consts::PI;
    println!("A,capped,limit_form");
    for a in [2.0 * PI * 20.0, 2.0 * PI * 20.0 + PI / 2.0, 100.0, 150.0, 200.0] {
        println!("{a},{},{}", pinsky_spherical_demo(a), 1.0 - 2.0 / PI * a.sin());
    }
    let caps: Vec<f64> = (0..=100).map(|k| 100.0 + k as f64).collect();
    let r = pinsky_cap_result(&caps, &Quad::default());
    println!(
        "caps 100..200: converged={}, oscillation amplitude {:.4}",
        r.converged, r.oscillation_amplitude
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Price(a) => cmd_price(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Greeks(a) => cmd_greeks(a),
        Command::BenchDecay => cmd_bench(),
        Command::PinskyDemo => cmd_pinsky(),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
