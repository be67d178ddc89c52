//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use fourval::mc::price_mc_grid;
use fourval::models::{nig_covariance, DhsvParams, ModelSpec, Nig1dParams, Nig2dParams};
use fourval::payoffs::{decay_estimate, log_grid, PayoffSpec};
use fourval::pricer::{
    delta, digital_value_midpoint_check, gamma, price, price_min_two, price_strikes, PriceRequest,
};
use fourval::quadrature::{pinsky_cap_result, pinsky_spherical_demo};
use fourval::{McConfig, Quad};

const STRIKES: [f64; 11] = [85.0, 90.0, 92.5, 95.0, 97.5, 100.0, 102.5, 105.0, 107.5, 110.0, 115.0];
const MATURITIES: [f64; 6] = [1.0 / 12.0, 2.0 / 12.0, 0.25, 0.50, 0.75, 1.00];

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bs(s: f64, k: f64, sigma: f64, t: f64, r: f64) -> (f64, f64, f64) {
    let n = Normal::standard();
    let d1 = ((s / k).ln() + (r + 0.5 * sigma * sigma) * t) / (sigma * t.sqrt());
    let d2 = d1 - sigma * t.sqrt();
    (
        s * n.cdf(d1) - k * (-r * t).exp() * n.cdf(d2),
        n.cdf(d1),
        n.pdf(d1) / (s * sigma * t.sqrt()),
    )
}

fn nig2d(m: [[f64; 2]; 2]) -> Nig2dParams<f64> {
    Nig2dParams::new(6.20, [-3.80, -2.50], 0.150, [0.0, 0.0], m).unwrap()
}

const PLUS: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];
const MINUS: [[f64; 2]; 2] = [[1.0, -1.0], [-1.0, 2.0]];

/// Brownian, univariate NIG and both NIG2d marginals, drift fixed for `r`.
fn univariate_models(r: f64) -> Vec<ModelSpec<f64>> {
    vec![
        ModelSpec::brownian(0.0, 0.04).unwrap(),
        ModelSpec::Nig1d(Nig1dParams::new(6.2, -3.8, 0.15, 0.0).unwrap()),
        ModelSpec::Nig1d(nig2d(PLUS).marginal(0)),
        ModelSpec::Nig1d(nig2d(MINUS).marginal(1)),
    ]
    .into_iter()
    .map(|m| m.fix_drift(r, 0.0).unwrap())
    .collect()
}

fn grid_values(req: &PriceRequest<f64>, payoff: PayoffSpec<f64>, t: f64) -> (Vec<f64>, usize) {
    let mut q = req.clone();
    q.payoff = payoff;
    q.maturity = t;
    let res = price_strikes(&q, &STRIKES, true).unwrap();
    let nodes = res[0].as_ref().unwrap().diagnostics.nodes;
    (res.into_iter().map(|r| r.unwrap().value).collect(), nodes)
}

fn c1_black_scholes() -> Outcome {
    let model = ModelSpec::brownian(0.0, 0.04).unwrap().fix_drift(0.0, 0.0).unwrap();
    let req = PriceRequest::new(vec![100.0], PayoffSpec::Call { strike: 100.0 }, model, 1.0);
    let t0 = Instant::now();
    let v = price(&req).unwrap().value;
    let el = t0.elapsed().as_secs_f64();
    let exact = bs(100.0, 100.0, 0.2, 1.0, 0.0).0;
    check(
        (v - exact).abs() <= 1e-6 && (v - 7.9656).abs() < 5e-5 && el < 0.1,
        format!("price {v:.10}, closed form {exact:.10}, |diff| {:.2e}, {el:.4} s", (v - exact).abs()),
    )
}

fn c2_parity() -> Outcome {
    let r = 0.03;
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for model in univariate_models(r) {
        let req = PriceRequest {
            rate: r,
            ..PriceRequest::new(vec![100.0], PayoffSpec::Call { strike: 100.0 }, model, 1.0)
        };
        for t in MATURITIES {
            let (c, _) = grid_values(&req, PayoffSpec::Call { strike: 100.0 }, t);
            let (p, _) = grid_values(&req, PayoffSpec::Put { strike: 100.0 }, t);
            for (i, k) in STRIKES.iter().enumerate() {
                worst = worst.max((c[i] - p[i] - (100.0 - (-r * t).exp() * k)).abs());
            }
        }
    }
    let el = t0.elapsed().as_secs_f64();
    check(worst <= 1e-8 && el < 5.0, format!("max parity gap {worst:.2e} over 4 models x 66 cells, {el:.2} s"))
}

fn c3_decomposition() -> Outcome {
    let mut worst: f64 = 0.0;
    let (mut direct, mut split) = (0usize, 0usize);
    for model in univariate_models(0.0) {
        let req = PriceRequest::new(vec![100.0], PayoffSpec::Call { strike: 100.0 }, model, 1.0);
        for t in MATURITIES {
            let (c, n1) = grid_values(&req, PayoffSpec::Call { strike: 100.0 }, t);
            let (a, n2) = grid_values(&req, PayoffSpec::AssetOrNothingCall { barrier: 100.0 }, t);
            let (d, n3) = grid_values(&req, PayoffSpec::DigitalCall { barrier: 100.0 }, t);
            direct += n1;
            split += n2 + n3;
            for (i, k) in STRIKES.iter().enumerate() {
                worst = worst.max((c[i] - (a[i] - k * d[i])).abs());
            }
        }
    }
    let u: Vec<f64> = log_grid(100.0, 1.0e4, 64);
    let pc: f64 = decay_estimate(&PayoffSpec::Call { strike: 100.0 }, 1.75, &u).unwrap();
    let pd: f64 = decay_estimate(&PayoffSpec::DigitalCall { barrier: 100.0 }, 0.5, &u).unwrap();
    check(
        worst <= 1e-6 && (pc - 2.0).abs() <= 0.1 && (pd - 1.0).abs() <= 0.1 && split > direct,
        format!("max gap {worst:.2e}; decay call {pc:.3}, digital {pd:.3}; nodes direct {direct}, split {split}"),
    )
}

fn c4_compound_poisson() -> Outcome {
    let model = ModelSpec::compound_poisson(0.0, &[(0.1, 2.0)]).unwrap().fix_drift(0.0, 0.0).unwrap();
    let b = match &model {
        ModelSpec::CompoundPoissonDrift1d(tr) => tr.drift[0] - 0.2,
        _ => unreachable!(),
    };
    // Independent lattice sum: X_1 = b + 0.1 N, N ~ Poisson(2).
    let lattice = |c: f64, strict: bool| {
        let mut p = (-2.0f64).exp();
        let mut s = 0.0;
        for n in 0..200 {
            if n > 0 {
                p *= 2.0 / n as f64;
            }
            let x = b + 0.1 * n as f64;
            if if strict { x > c + 1e-12 } else { x >= c - 1e-12 } {
                s += p;
            }
        }
        s
    };
    let quad = Quad::default();
    let off = 100.0 * (b + 0.15f64).exp();
    let req = PriceRequest::new(vec![100.0], PayoffSpec::DigitalCall { barrier: off }, model.clone(), 1.0);
    let v_off = price(&req).unwrap().value;
    let e_off = lattice((off / 100.0f64).ln(), true);
    let at = 100.0 * (b + 0.1f64).exp();
    let chk = digital_value_midpoint_check(&model, 100.0, at, 1.0, 0.0, &quad).unwrap();
    let c = (at / 100.0f64).ln();
    let mid = 0.5 * (lattice(c, false) + lattice(c, true));
    let ok = (v_off - e_off).abs() <= 1e-6 && (chk.capped.value - mid).abs() <= 1e-5;
    check(
        ok,
        format!(
            "off-atom {v_off:.9} vs {e_off:.9}; at atom {:.9} vs midpoint {mid:.9}",
            chk.capped.value
        ),
    )
}

fn c5_covariance() -> Outcome {
    let plus = nig_covariance(&nig2d(PLUS)).unwrap();
    let minus = nig_covariance(&nig2d(MINUS)).unwrap();
    let ep = [[0.0646, 0.0191], [0.0191, 0.0481]];
    let em = [[0.0287, -0.0258], [-0.0258, 0.0556]];
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((plus[i][j] - ep[i][j]).abs()).max((minus[i][j] - em[i][j]).abs());
        }
    }
    check(worst <= 1e-4, format!("plus {plus:.4?}, minus {minus:.4?}, max deviation {worst:.1e}"))
}

fn c6_min_of_two() -> Outcome {
    let t0 = Instant::now();
    let dhsv = DhsvParams::new([0.5, 1.0, 0.05], 0.5, 0.25, -0.5, 0.04, 1.0, 0.04, [0.0, 0.0]).unwrap();
    let sets = [
        ("NIG2d plus", ModelSpec::Nig2d(nig2d(PLUS)), vec![100.0, 95.0]),
        ("NIG2d minus", ModelSpec::Nig2d(nig2d(MINUS)), vec![100.0, 95.0]),
        ("DHSV", ModelSpec::Dhsv2d(dhsv), vec![96.0, 100.0]),
    ];
    let mc = McConfig::default();
    let mut parts = Vec::new();
    let mut all = true;
    for (name, model, spot) in sets {
        let model = model.fix_drift(0.0, 0.0).unwrap();
        let req = PriceRequest::new(spot, PayoffSpec::MinCall { strike: 100.0, assets: 2 }, model, 1.0);
        let strikes: Vec<Option<f64>> = STRIKES.iter().map(|k| Some(*k)).collect();
        let oracle = price_mc_grid(&req, &strikes, &MATURITIES, &mc).unwrap();
        let (mut inside, mut worst, mut degenerate) = (0, 0.0f64, 0);
        for (ti, t) in MATURITIES.iter().enumerate() {
            let (f, _) = grid_values(&req, req.payoff.clone(), *t);
            for (ki, v) in f.iter().enumerate() {
                let e = oracle[ti][ki];
                if e.std_error > 0.0 {
                    worst = worst.max((v - e.mean).abs() / e.std_error);
                } else {
                    // No path finished in the money: the estimate is 0 with zero spread.
                    degenerate += 1;
                }
                if e.brackets(*v, 3.0) {
                    inside += 1;
                } else {
                    eprintln!("  {name} T={t:.4} K={}: fourier {v:.6}, mc {:.6} +- {:.6}", STRIKES[ki], e.mean, e.std_error);
                }
            }
        }
        all &= inside == 66;
        parts.push(format!(
            "{name} {inside}/66 (max {worst:.2} se over cells with spread, {degenerate} zero-variance cells)"
        ));
    }
    let el = t0.elapsed().as_secs_f64();
    check(all && el < 600.0, format!("{}; {el:.1} s", parts.join(", ")))
}

fn c7_pinsky() -> Outcome {
    let a1 = 2.0 * PI * 20.0;
    let a2 = a1 + PI / 2.0;
    let v1 = pinsky_spherical_demo(a1);
    let v2 = pinsky_spherical_demo(a2);
    let l1 = 1.0 - 2.0 / PI * a1.sin();
    let l2 = 1.0 - 2.0 / PI * a2.sin();
    let caps: Vec<f64> = (0..=100).map(|k| 100.0 + k as f64).collect();
    let det = pinsky_cap_result(&caps, &Quad::default());
    check(
        (v1 - l1).abs() <= 0.05 && (v2 - l2).abs() <= 0.05 && !det.converged,
        format!(
            "A=40pi: {v1:.4} vs {l1:.4}; A=40pi+pi/2: {v2:.4} vs {l2:.4}; detector converged={} (amplitude {:.3})",
            det.converged, det.oscillation_amplitude
        ),
    )
}

fn c8_greeks() -> Outcome {
    let model = ModelSpec::brownian(0.0, 0.04).unwrap().fix_drift(0.0, 0.0).unwrap();
    let req = PriceRequest::new(vec![100.0], PayoffSpec::Call { strike: 100.0 }, model, 1.0);
    let (_, d_bs, g_bs) = bs(100.0, 100.0, 0.2, 1.0, 0.0);
    let (d, g) = (delta(&req).unwrap(), gamma(&req).unwrap());
    let bs_ok = (d - d_bs).abs() <= 1e-5 && (g - g_bs).abs() <= 1e-5;

    let nig = ModelSpec::Nig1d(Nig1dParams::new(6.2, -3.8, 0.15, 0.0).unwrap()).fix_drift(0.0, 0.0).unwrap();
    let nreq = PriceRequest::new(vec![100.0], PayoffSpec::Call { strike: 100.0 }, nig, 0.5);
    let h = 1e-2;
    let at = |s: f64| {
        let mut q = nreq.clone();
        q.spot = vec![s];
        price(&q).unwrap().value
    };
    let (up, mid, dn) = (at(100.0 + h), at(100.0), at(100.0 - h));
    let fd_d = (up - dn) / (2.0 * h);
    let fd_g = (up - 2.0 * mid + dn) / (h * h);
    let (nd, ng) = (delta(&nreq).unwrap(), gamma(&nreq).unwrap());
    let rd = ((nd - fd_d) / nd).abs();
    let rg = ((ng - fd_g) / ng).abs();
    check(
        bs_ok && rd <= 1e-4 && rg <= 1e-3,
        format!(
            "BS delta {d:.7} ({d_bs:.7}), gamma {g:.7} ({g_bs:.7}); NIG vs FD rel err delta {rd:.1e}, gamma {rg:.1e}"
        ),
    )
}

fn c9_damping() -> Outcome {
    let mut worst: f64 = 0.0;
    for model in univariate_models(0.0).into_iter().take(2) {
        let vals: Vec<f64> = [1.25, 1.75, 2.5]
            .iter()
            .map(|&r| {
                let req = PriceRequest::new(vec![100.0], PayoffSpec::Call { strike: 100.0 }, model.clone(), 1.0)
                    .with_damping(vec![r]);
                price(&req).unwrap().value
            })
            .collect();
        for v in &vals {
            worst = worst.max((v - vals[0]).abs());
        }
    }
    check(worst <= 1e-7, format!("max spread over R in {{1.25, 1.75, 2.5}}: {worst:.2e}"))
}

fn c10_specialized() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let quad = Quad {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        ..Quad::default()
    };
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let alpha = rng.random_range(5.0..12.0);
        let beta = [rng.random_range(-3.0..0.0), rng.random_range(-3.0..0.0)];
        let delta = rng.random_range(0.1..0.6);
        let a = rng.random_range(0.8..1.5);
        let c = rng.random_range(-0.4..0.4);
        let m = [[a, c], [c, (1.0 + c * c) / a]];
        let params = Nig2dParams::new(alpha, beta, delta, [0.0, 0.0], m).unwrap();
        let model = ModelSpec::Nig2d(params).fix_drift(0.0, 0.0).unwrap();
        let s = [rng.random_range(80.0..120.0), rng.random_range(80.0..120.0)];
        let k = rng.random_range(85.0..115.0);
        let t = rng.random_range(0.25..1.0);
        let (r1, r2) = loop {
            let r = [rng.random_range(0.3..1.5), rng.random_range(0.3..1.5)];
            if r[0] + r[1] > 1.2 && params.strip_margin(&r) > 0.5 {
                break (r[0], r[1]);
            }
        };
        let req = PriceRequest::new(s.to_vec(), PayoffSpec::MinCall { strike: k, assets: 2 }, model.clone(), t)
            .with_damping(vec![r1, r2])
            .with_quad(quad.clone());
        let generic = price(&req).unwrap().value;
        let special = price_min_two(s[0], s[1], k, &model, t, r1, r2, &quad).unwrap();
        worst = worst.max((generic - special).abs());
    }
    check(worst <= 1e-8, format!("max |generic - specialized| over 10 draws: {worst:.2e}"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 Black-Scholes equivalence", c1_black_scholes),
        ("2 put-call parity", c2_parity),
        ("3 decomposition and decay", c3_decomposition),
        ("4 compound-Poisson digital", c4_compound_poisson),
        ("5 NIG2d covariance", c5_covariance),
        ("6 min-of-two vs Monte Carlo", c6_min_of_two),
        ("7 Pinsky divergence", c7_pinsky),
        ("8 Greeks", c8_greeks),
        ("9 damping invariance", c9_damping),
        ("10 generic vs specialized", c10_specialized),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS  {name}: {d} [{secs:.1} s]"),
            Err(d) => {
                println!("FAIL  {name}: {d} [{secs:.1} s]");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
