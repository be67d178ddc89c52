use std::path::PathBuf;
use std::process::Command;

use fourval_cli::config::{parse_model, parse_payoff, GridJob, ModelConfig, ModelRef, PayoffConfig};
use fourval_cli::grid::{emit_plot_data, parse_plot_data, read_csv_grid, run_grid, write_csv, GridOptions};
use fourval_cli::bench::bench_decay_demo;
use fourval_cli::CliError;
use fourval::models::mgf_real;

fn jobs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("jobs")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fourval"))
}

fn small_job() -> GridJob {
    GridJob {
        model: ModelRef::Path(jobs_dir().join("nig2d_plus.model.json")),
        payoff: PayoffConfig::MinCall {
            strike: 100.0,
            assets: 2,
        },
        strikes: vec![90.0, 100.0, 110.0],
        maturities: vec![0.5, 1.0],
        spot: vec![100.0, 95.0],
        rate: 0.0,
        dividend: 0.0,
        damping: None,
        quad: Default::default(),
        output: None,
        oracle: false,
        paths: None,
        seed: None,
    }
}

fn csv_of(job: &GridJob, opts: &GridOptions) -> String {
    let rows = run_grid(job, opts).unwrap();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn model_and_payoff_json() {
    let m = parse_model(r#"{"kind": "Brownian1d", "sigma": 0.2}"#).unwrap();
    assert_eq!(m, ModelConfig::Brownian1d { sigma: 0.2, b: None });
    let p = parse_payoff(r#"{"kind": "DoubleDigital", "B_low": 90, "B_high": 110}"#).unwrap();
    assert_eq!(p, PayoffConfig::DoubleDigital { low: 90.0, high: 110.0 });
    let prod = parse_payoff(r#"{"kind": "Product", "factors": [{"kind": "Call", "K": 1}, {"kind": "Put", "K": 2}]}"#)
        .unwrap()
        .build()
        .unwrap();
    assert_eq!(prod.dimension(), 2);
    assert!(matches!(parse_model(r#"{"kind": "Heston"}"#), Err(CliError::Config(_))));
    let bad = parse_model(r#"{"kind": "NIG1d", "alpha": 1.0, "beta": 2.0, "delta": 0.1}"#).unwrap();
    let err = bad.build(0.0, 0.0).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn documented_json_forms() {
    let m = parse_model(r#"{"kind":"NIG2d","alpha":6.20,"beta":[-3.80,-2.50],"delta":0.150,"Delta":[[1,0],[0,1]]}"#)
        .unwrap()
        .build(0.0, 0.0)
        .unwrap();
    for e in [[1.0, 0.0], [0.0, 1.0]] {
        assert!((mgf_real(&m, &e, 1.0).unwrap() - 1.0).abs() < 1e-10);
    }
    let p = parse_payoff(r#"{"kind":"MinCall","K":100,"d":2}"#).unwrap().build().unwrap();
    assert_eq!(p.dimension(), 2);
    let prod = parse_payoff(r#"{"kind":"Product","factors":[{"kind":"Call","K":100},{"kind":"DigitalCall","B":110}]}"#)
        .unwrap()
        .build()
        .unwrap();
    assert_eq!(prod.dimension(), 2);
}

#[test]
fn explicit_drift_is_kept() {
    let m = parse_model(r#"{"kind": "Brownian1d", "sigma": 0.2, "b": 0.5}"#).unwrap().build(0.0, 0.0).unwrap();
    assert!((mgf_real(&m, &[1.0], 1.0).unwrap() - (0.5f64 + 0.02).exp()).abs() < 1e-12);
}

#[test]
fn job_files_load() {
    for name in ["nig2d_plus", "nig2d_minus", "dhsv"] {
        let job = GridJob::load(&jobs_dir().join(format!("{name}.job.json"))).unwrap();
        assert_eq!(job.strikes.len() * job.maturities.len(), 66);
        job.model_config().unwrap().build(0.0, 0.0).unwrap();
    }
}

#[test]
fn empty_strikes_rejected() {
    let mut job = small_job();
    job.strikes.clear();
    assert!(matches!(job.validate(), Err(CliError::Config(_))));
    assert!(run_grid(&job, &GridOptions::default()).is_err());
}

#[test]
fn cached_and_uncached_csv_identical() {
    let job = small_job();
    let a = csv_of(&job, &GridOptions::default());
    let b = csv_of(
        &job,
        &GridOptions {
            no_cache: true,
            ..Default::default()
        },
    );
    assert_eq!(a, b);
    assert!(a.starts_with("maturity,strike,price,mode,converged\n"));
    assert_eq!(a, csv_of(&job, &GridOptions::default()));
}

#[test]
fn plot_data_round_trip() {
    let csv = csv_of(&small_job(), &GridOptions::default());
    let plot = emit_plot_data(&csv).unwrap();
    assert_eq!(plot.split("\n\n").count(), 2);
    let back = parse_plot_data(&plot).unwrap();
    let cells = read_csv_grid(&csv).unwrap();
    assert_eq!(back.len(), cells.len());
    for (x, y) in back.iter().zip(&cells) {
        assert_eq!(x.0.to_bits(), y.0.to_bits());
        assert_eq!(x.1.to_bits(), y.1.to_bits());
        assert_eq!(x.2.to_bits(), y.2.to_bits());
    }
    assert!(matches!(emit_plot_data("maturity,strike\n1,2\n"), Err(CliError::Parse(_))));
    assert!(parse_plot_data("1 2\n").is_err());
}

#[test]
fn oracle_columns_bracket_fourier() {
    let mut job = small_job();
    job.oracle = true;
    job.paths = Some(200_000);
    let rows = run_grid(&job, &GridOptions::default()).unwrap();
    for r in &rows {
        let mc = r.mc.unwrap();
        let p = r.price.unwrap();
        assert!(mc.brackets(p, 3.0), "T={} K={}: {p} vs {mc:?}", r.maturity, r.strike);
    }
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    assert!(String::from_utf8(buf)
        .unwrap()
        .starts_with("maturity,strike,price,mode,converged,mc_mean,mc_stderr\n"));
}

#[test]
fn full_nig_grid_shape() {
    let job = GridJob::load(&jobs_dir().join("nig2d_plus.job.json")).unwrap();
    let rows = run_grid(&job, &GridOptions::default()).unwrap();
    assert_eq!(rows.len(), 66);
    for chunk in rows.chunks(11) {
        let prices: Vec<f64> = chunk.iter().map(|r| r.price.unwrap()).collect();
        for p in &prices {
            assert!(*p >= 0.0 && *p <= 95.0);
        }
        for w in prices.windows(2) {
            assert!(w[1] < w[0], "{prices:?}");
        }
        assert!(chunk.iter().all(|r| r.mode == Some(fourval::Mode::LebesgueNd) && r.converged));
    }
}

#[test]
fn binary_price_black_scholes() {
    let out = bin()
        .args([
            "price",
            "--model",
            r#"{"kind": "Brownian1d", "sigma": 0.2}"#,
            "--payoff",
            r#"{"kind": "Call", "K": 100}"#,
            "--spot",
            "100",
            "--maturity",
            "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let cells = read_csv_grid(&text).unwrap();
    assert!((cells[0].2 - 7.965567455405804).abs() < 1e-6, "{text}");
    assert!(text.contains("Lebesgue1d"));
}

#[test]
fn binary_greeks() {
    let out = bin()
        .args([
            "greeks",
            "--model",
            r#"{"kind": "Brownian1d", "sigma": 0.2}"#,
            "--payoff",
            r#"{"kind": "Call", "K": 100}"#,
            "--spot",
            "100",
            "--maturity",
            "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let vals: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((vals[0] - 0.5398).abs() < 1e-4);
    assert!((vals[1] - 0.0198).abs() < 1e-4);
}

#[test]
fn binary_exit_codes() {
    let out = bin()
        .args(["price", "--model", "{not json", "--payoff", r#"{"kind": "Call", "K": 100}"#, "--spot", "100", "--maturity", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.json");
    std::fs::write(
        &job,
        format!(
            r#"{{"model": {:?}, "payoff": {{"kind": "Call", "K": 100}}, "strikes": [100], "maturities": [1], "spot": [100]}}"#,
            dir.path().join("missing.json")
        ),
    )
    .unwrap();
    let out = bin().args(["grid", "--job"]).arg(&job).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(
        &job,
        r#"{"model": {"kind": "NIG1d", "alpha": 6.2, "beta": -3.8, "delta": 0.15}, "payoff": {"kind": "Call", "K": 100}, "strikes": [90, 100], "maturities": [1], "spot": [100], "damping": [0.5]}"#,
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let out = bin().args(["grid", "--job"]).arg(&job).arg("--out").arg(&csv).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("T=1 K=90") && err.contains("infeasible"), "{err}");
}

#[test]
fn binary_grid_writes_plot() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.json");
    std::fs::write(
        &job,
        r#"{"model": {"kind": "Brownian1d", "sigma": 0.2}, "payoff": {"kind": "Call", "K": 100}, "strikes": [90, 100, 110], "maturities": [0.5, 1], "spot": [100]}"#,
    )
    .unwrap();
    let csv = dir.path().join("g.csv");
    let plot = dir.path().join("g.dat");
    let status = bin()
        .args(["grid", "--job"])
        .arg(&job)
        .arg("--out")
        .arg(&csv)
        .arg("--plot")
        .arg(&plot)
        .status()
        .unwrap();
    assert!(status.success());
    let cells = parse_plot_data(&std::fs::read_to_string(&plot).unwrap()).unwrap();
    assert_eq!(cells.len(), 6);
    assert!(cells[0].2 > cells[1].2 && cells[1].2 > cells[2].2);
}

#[test]
fn binary_pinsky_demo() {
    let out = bin().arg("pinsky-demo").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("converged=false"), "{text}");
}

#[test]
fn decay_benchmark() {
    let r = bench_decay_demo().unwrap();
    assert_eq!(r.cells, 110);
    assert!(r.split_needs_more_nodes(), "{r:?}");
    assert!(r.max_difference < 1e-6, "{r:?}");
    assert!((r.call_decay - 2.0).abs() < 0.1, "{r:?}");
    assert!((r.digital_decay - 1.0).abs() < 0.1, "{r:?}");
    assert!((r.aon_decay - 1.0).abs() < 0.1, "{r:?}");
}
