use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::*;
use crate::models::{DhsvParams, Nig1dParams, Nig2dParams};

fn bs_call(s: f64, k: f64, sigma: f64, t: f64, r: f64) -> (f64, f64, f64) {
    let n = Normal::standard();
    let d1 = ((s / k).ln() + (r + 0.5 * sigma * sigma) * t) / (sigma * t.sqrt());
    let d2 = d1 - sigma * t.sqrt();
    let price = s * n.cdf(d1) - k * (-r * t).exp() * n.cdf(d2);
    (price, n.cdf(d1), n.pdf(d1) / (s * sigma * t.sqrt()))
}

fn brownian() -> ModelSpec<f64> {
    ModelSpec::<f64>::brownian(0.0, 0.04).unwrap().fix_drift(0.0, 0.0).unwrap()
}

fn nig1d() -> ModelSpec<f64> {
    ModelSpec::Nig1d(Nig1dParams::new(6.2, -3.8, 0.15, 0.0).unwrap())
        .fix_drift(0.0, 0.0)
        .unwrap()
}

fn nig2d() -> ModelSpec<f64> {
    let p = Nig2dParams::new(6.20, [-3.80, -2.50], 0.150, [0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]]).unwrap();
    ModelSpec::Nig2d(p).fix_drift(0.0, 0.0).unwrap()
}

fn cp() -> ModelSpec<f64> {
    ModelSpec::compound_poisson(0.0, &[(0.1, 2.0)])
        .unwrap()
        .fix_drift(0.0, 0.0)
        .unwrap()
}

fn req1(payoff: PayoffSpec<f64>, model: ModelSpec<f64>, t: f64) -> PriceRequest<f64> {
    PriceRequest::new(vec![100.0], payoff, model, t)
}

fn value(r: &PriceRequest<f64>) -> f64 {
    price(r).unwrap().value
}

#[test]
fn black_scholes_call() {
    let r = req1(PayoffSpec::Call { strike: 100.0 }, brownian(), 1.0);
    let res = price(&r).unwrap();
    assert_eq!(res.mode, Mode::Lebesgue1d);
    let (bs, _, _) = bs_call(100.0, 100.0, 0.2, 1.0, 0.0);
    assert!((res.value - 7.9656).abs() < 1e-4);
    assert!((res.value - bs).abs() < 1e-6, "{} vs {bs}", res.value);
}

#[test]
fn black_scholes_with_rates() {
    let r = req1(PayoffSpec::Call { strike: 95.0 }, ModelSpec::brownian(0.0, 0.09).unwrap(), 0.5)
        .with_rates(0.05, 0.0)
        .unwrap();
    let (bs, _, _) = bs_call(100.0, 95.0, 0.3, 0.5, 0.05);
    assert!((value(&r) - bs).abs() < 1e-6);
}

#[test]
fn put_call_parity() {
    for (model, t) in [(brownian(), 1.0), (nig1d(), 0.25), (cp(), 1.0)] {
        for k in [80.0, 100.0, 125.0] {
            let c = req1(PayoffSpec::Call { strike: k }, model.clone(), t).with_rates(0.03, 0.01).unwrap();
            let mut p = c.clone();
            p.payoff = PayoffSpec::Put { strike: k };
            let lhs = value(&c) - value(&p);
            let rhs = 100.0 * (-0.01f64 * t).exp() - k * (-0.03f64 * t).exp();
            assert!((lhs - rhs).abs() < 1e-8, "{} K={k}: {lhs} vs {rhs}", model.kind_name());
        }
    }
}

#[test]
fn call_decomposition() {
    for model in [brownian(), nig1d()] {
        let k = 105.0;
        let call = value(&req1(PayoffSpec::Call { strike: k }, model.clone(), 0.5));
        let aon = value(&req1(PayoffSpec::AssetOrNothingCall { barrier: k }, model.clone(), 0.5));
        let dig = value(&req1(PayoffSpec::DigitalCall { barrier: k }, model.clone(), 0.5));
        assert!((call - (aon - k * dig)).abs() < 1e-6, "{call} {aon} {dig}");
    }
}

#[test]
fn double_digital_decomposition() {
    let model = nig1d();
    let dd = value(&req1(PayoffSpec::DoubleDigital { low: 95.0, high: 110.0 }, model.clone(), 0.5));
    let hi = value(&req1(PayoffSpec::DigitalPut { barrier: 110.0 }, model.clone(), 0.5));
    let lo = value(&req1(PayoffSpec::DigitalPut { barrier: 95.0 }, model, 0.5));
    assert!((dd - (hi - lo)).abs() < 1e-6, "{dd} vs {}", hi - lo);
}

#[test]
fn digital_under_brownian_matches_normal_cdf() {
    let r = req1(PayoffSpec::DigitalCall { barrier: 110.0 }, brownian(), 1.0);
    let res = price(&r).unwrap();
    assert_eq!(res.mode, Mode::CappedPointwise1d);
    assert!(!res.diagnostics.midpoint_at_atoms);
    let n = Normal::standard();
    let d2 = ((100.0f64 / 110.0).ln() - 0.02) / 0.2;
    assert!((res.value - n.cdf(d2)).abs() < 1e-6, "{} vs {}", res.value, n.cdf(d2));
}

fn poisson_sum(b: f64, x: f64, lam: f64, c: f64) -> f64 {
    let mut p = (-lam).exp();
    let mut acc = 0.0;
    for n in 0..200 {
        if n > 0 {
            p *= lam / n as f64;
        }
        if b + x * n as f64 > c {
            acc += p;
        }
    }
    acc
}

#[test]
fn compound_poisson_digital_off_lattice() {
    let model = cp();
    let b = match &model {
        ModelSpec::CompoundPoissonDrift1d(tr) => tr.drift[0] - 2.0 * 0.1,
        _ => unreachable!(),
    };
    let barrier = 100.0 * (b + 0.15f64).exp();
    let r = req1(PayoffSpec::DigitalCall { barrier }, model, 1.0);
    let res = price(&r).unwrap();
    assert!(res.diagnostics.midpoint_at_atoms);
    assert!(res.converged);
    let exact = poisson_sum(b, 0.1, 2.0, (barrier / 100.0f64).ln());
    assert!((res.value - exact).abs() < 1e-6, "{} vs {exact}", res.value);
}

#[test]
fn midpoint_at_an_atom() {
    let model = cp();
    let b = match &model {
        ModelSpec::CompoundPoissonDrift1d(tr) => tr.drift[0] - 0.2,
        _ => unreachable!(),
    };
    let barrier = 100.0 * (b + 0.1f64).exp();
    let chk = digital_value_midpoint_check(&model, 100.0, barrier, 1.0, 0.0, &QuadConfig::default()).unwrap();
    assert!(chk.left - chk.right > 0.2, "atom mass missing");
    let mid = 0.5 * (chk.left + chk.right);
    assert!((chk.capped.value - mid).abs() < 1e-5, "{} vs {mid}", chk.capped.value);
}

#[test]
fn midpoint_check_atomless() {
    let chk = digital_value_midpoint_check(&brownian(), 100.0, 97.0, 1.0, 0.0, &QuadConfig::default()).unwrap();
    assert_eq!(chk.left, chk.right);
    assert!((chk.capped.value - chk.left).abs() < 1e-8);
}

#[test]
fn damping_invariance() {
    for model in [brownian(), nig1d()] {
        let vals: Vec<f64> = [1.25, 1.75, 2.5]
            .iter()
            .map(|&r| value(&req1(PayoffSpec::Call { strike: 100.0 }, model.clone(), 1.0).with_damping(vec![r])))
            .collect();
        for v in &vals {
            assert!((v - vals[0]).abs() < 1e-7, "{vals:?}");
        }
    }
}

#[test]
fn infeasible_damping_rejected() {
    let r = req1(PayoffSpec::Call { strike: 100.0 }, nig1d(), 1.0).with_damping(vec![0.5]);
    assert!(matches!(check_conditions(&r), Err(Error::Infeasible(_))));
}

#[test]
fn dispatch_modes() {
    assert_eq!(check_conditions(&req1(PayoffSpec::Call { strike: 100.0 }, nig1d(), 1.0)).unwrap().mode, Mode::Lebesgue1d);
    let d = check_conditions(&req1(PayoffSpec::DigitalCall { barrier: 100.0 }, cp(), 1.0)).unwrap();
    assert_eq!(d.mode, Mode::CappedPointwise1d);
    assert!(d.midpoint_at_atoms);
    let two = PriceRequest::new(vec![100.0, 95.0], PayoffSpec::MinCall { strike: 100.0, assets: 2 }, nig2d(), 0.25);
    let d = check_conditions(&two).unwrap();
    assert_eq!(d.mode, Mode::LebesgueNd);
    assert_eq!(d.integrability, Some(Integrability::DecayBound));
}

#[test]
fn price_bounds_and_monotonicity() {
    let model = nig1d();
    let mut prev = -1.0;
    for s in [80.0, 90.0, 100.0, 110.0, 120.0] {
        let mut r = req1(PayoffSpec::DigitalCall { barrier: 100.0 }, model.clone(), 0.5);
        r.spot = vec![s];
        let v = value(&r);
        assert!(v >= prev - 1e-8 && v <= 1.0 + 1e-8);
        prev = v;
        r.payoff = PayoffSpec::Call { strike: 100.0 };
        let c = value(&r);
        assert!(c >= 0.0 && c <= s);
    }
}

#[test]
fn strike_grid_cache_is_exact() {
    let r = req1(PayoffSpec::Call { strike: 100.0 }, nig1d(), 0.25);
    let ks = [80.0, 90.0, 100.0, 110.0, 120.0];
    let a = price_strikes(&r, &ks, true).unwrap();
    let b = price_strikes(&r, &ks, false).unwrap();
    for ((x, y), k) in a.iter().zip(&b).zip(ks) {
        let (x, y) = (x.as_ref().unwrap().value, y.as_ref().unwrap().value);
        assert_eq!(x.to_bits(), y.to_bits());
        let mut single = r.clone();
        single.payoff = PayoffSpec::Call { strike: k };
        assert!((x - value(&single)).abs() < 1e-8);
    }
}

#[test]
fn brownian_greeks() {
    let r = req1(PayoffSpec::Call { strike: 100.0 }, brownian(), 1.0);
    let (_, d, g) = bs_call(100.0, 100.0, 0.2, 1.0, 0.0);
    let dv = delta(&r).unwrap();
    let gv = gamma(&r).unwrap();
    assert!((dv - 0.5398).abs() < 1e-4 && (dv - d).abs() < 1e-5, "{dv}");
    assert!((gv - g).abs() < 1e-5, "{gv} vs {g}");
    let mut deep = r.clone();
    deep.payoff = PayoffSpec::Call { strike: 10.0 };
    assert!((delta(&deep).unwrap() - 1.0).abs() < 1e-4);
}

#[test]
fn greeks_match_finite_differences() {
    let r = req1(PayoffSpec::Call { strike: 105.0 }, nig1d(), 0.5);
    let h = 1e-2;
    let at = |s: f64| {
        let mut q = r.clone();
        q.spot = vec![s];
        value(&q)
    };
    let (up, mid, dn) = (at(100.0 + h), at(100.0), at(100.0 - h));
    let fd_delta = (up - dn) / (2.0 * h);
    let fd_gamma = (up - 2.0 * mid + dn) / (h * h);
    let dv = delta(&r).unwrap();
    let gv = gamma(&r).unwrap();
    assert!(((dv - fd_delta) / dv).abs() < 1e-4, "{dv} vs {fd_delta}");
    assert!(((gv - fd_gamma) / gv).abs() < 1e-3, "{gv} vs {fd_gamma}");
}

#[test]
fn digital_delta_refused_under_atoms() {
    let r = req1(PayoffSpec::DigitalCall { barrier: 100.0 }, cp(), 1.0);
    assert!(matches!(delta(&r), Err(Error::Precondition(_))));
}

#[test]
fn min_call_specialized_matches_generic() {
    let model = nig2d();
    let quad = QuadConfig {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        ..QuadConfig::default()
    };
    let req = PriceRequest::new(vec![100.0, 95.0], PayoffSpec::MinCall { strike: 100.0, assets: 2 }, model.clone(), 0.25)
        .with_damping(vec![0.75, 0.75])
        .with_quad(quad.clone());
    let generic = value(&req);
    let special = price_min_two(100.0, 95.0, 100.0, &model, 0.25, 0.75, 0.75, &quad).unwrap();
    assert!((generic - special).abs() < 1e-8, "{generic} vs {special}");
    let c1 = value(&req1(PayoffSpec::Call { strike: 100.0 }, nig1d(), 0.25));
    assert!(generic > 0.0 && generic < c1 + 1.0);
}

#[test]
fn dhsv_min_call_runs() {
    let p = DhsvParams::new([0.5, 1.0, 0.05], 0.5, 0.25, -0.5, 0.04, 1.0, 0.04, [0.0, 0.0]).unwrap();
    let model = ModelSpec::Dhsv2d(p).fix_drift(0.0, 0.0).unwrap();
    let req = PriceRequest::new(vec![96.0, 100.0], PayoffSpec::MinCall { strike: 100.0, assets: 2 }, model, 0.5);
    let res = price(&req).unwrap();
    assert!(res.value > 0.0 && res.value < 20.0, "{}", res.value);
}

#[test]
fn cube_caps_agree_with_plane_integral() {
    let req = PriceRequest::new(vec![100.0, 95.0], PayoffSpec::MinCall { strike: 100.0, assets: 2 }, nig2d(), 1.0);
    let plane = price(&req).unwrap();
    let mut disp = check_conditions(&req).unwrap();
    disp.mode = Mode::L2CappedNd;
    let ev = evaluate(&req, std::slice::from_ref(&req.payoff), &disp, Weight::Price, true).unwrap();
    let cap = ev.caps[0].as_ref().unwrap();
    assert!(cap.converged, "{:?}", cap.levels);
    assert!((ev.values[0] - plane.value).abs() < 1e-6, "{} vs {}", ev.values[0], plane.value);
}
