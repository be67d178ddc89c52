//! Valuation formulas: condition checks, mode dispatch, prices and Greeks.
//!
//! A price is `e^{−rT} (2π)^{−d} ∫ e^{<R+iu, log S₀>} M_{X_T}(R+iu) f̂(iR−u) du`,
//! evaluated over `ℝ^d` when the integrand is absolutely integrable and as a
//! limit of capped integrals otherwise.

mod integrand;
mod special;

use std::cell::RefCell;
use std::fmt;

use num_complex::Complex;

pub use special::{digital_value_midpoint_check, price_min_two, MidpointCheck};

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::payoffs::{select_damping, PayoffSpec, Regularity};
use crate::quadrature::{self, CapResult, LineOptions, QuadConfig};
use crate::scalar::{cplx, lit, Real};
use integrand::{Integrand, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct PriceRequest<T> {
    pub spot: Vec<T>,
    pub payoff: PayoffSpec<T>,
    /// Law of the log-return; its drift is expected to be fixed already.
    pub model: ModelSpec<T>,
    pub maturity: T,
    pub rate: T,
    pub dividend: T,
    pub damping: Option<Vec<T>>,
    pub quad: QuadConfig<T>,
}

impl<T: Real> PriceRequest<T> {
    /// Request with zero rates and default quadrature settings.
    pub fn new(spot: Vec<T>, payoff: PayoffSpec<T>, model: ModelSpec<T>, maturity: T) -> Self {
        PriceRequest {
            spot,
            payoff,
            model,
            maturity,
            rate: T::zero(),
            dividend: T::zero(),
            damping: None,
            quad: QuadConfig::default(),
        }
    }

    /// Sets `r` and `q` and re-fixes the model drift for them.
    pub fn with_rates(mut self, rate: T, dividend: T) -> Result<Self> {
        self.model = self.model.fix_drift(rate, dividend)?;
        self.rate = rate;
        self.dividend = dividend;
        Ok(self)
    }

    pub fn with_damping(mut self, r: Vec<T>) -> Self {
        self.damping = Some(r);
        self
    }

    pub fn with_quad(mut self, quad: QuadConfig<T>) -> Self {
        self.quad = quad;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One asset, payoff with integrable transform: integral over ℝ.
    Lebesgue1d,
    /// One asset, discontinuous payoff: limit of symmetric capped integrals.
    CappedPointwise1d,
    /// Several assets, integrable integrand: integral over ℝ^d.
    LebesgueNd,
    /// Several assets otherwise: limit of cube-capped integrals.
    L2CappedNd,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Lebesgue1d => "Lebesgue1d",
            Mode::CappedPointwise1d => "CappedPointwise1d",
            Mode::LebesgueNd => "LebesgueNd",
            Mode::L2CappedNd => "L2CappedNd",
        };
        f.write_str(s)
    }
}

/// How integrability of `u ↦ M(R+iu)` was established.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrability {
    /// Analytic decay bound of the model.
    DecayBound,
    /// Tail decay fitted on rays; `slope` is the smallest log-log decay rate.
    Numerical { slope: f64, passed: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dispatch<T> {
    pub mode: Mode,
    pub damping: Vec<T>,
    /// Discontinuous payoff under a law with atoms: the capped limit is the
    /// midpoint of the one-sided values wherever the value function jumps.
    pub midpoint_at_atoms: bool,
    /// The model factor does not decay; the ℝ-integral is evaluated through
    /// tapered caps.
    pub windowed: bool,
    pub integrability: Option<Integrability>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<T> {
    pub nodes: usize,
    pub error_estimate: T,
    /// Largest `|h(−u) − conj h(u)|/|h(u)|` on the probe points.
    pub hermitian_residual: T,
    pub cap: Option<CapResult<T>>,
    pub midpoint_at_atoms: bool,
    pub windowed: bool,
    pub integrability: Option<Integrability>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceResult<T> {
    pub value: T,
    pub mode: Mode,
    pub damping_used: Vec<T>,
    pub converged: bool,
    pub diagnostics: Diagnostics<T>,
}

fn validate<T: Real>(req: &PriceRequest<T>) -> Result<()> {
    let d = req.payoff.dimension();
    if req.model.dimension() != d || req.spot.len() != d {
        return Err(Error::Parameter(format!(
            "dimensions disagree: payoff {d}, model {}, spot {}",
            req.model.dimension(),
            req.spot.len()
        )));
    }
    if d > 3 {
        return Err(Error::Parameter(format!("at most three assets supported, got {d}")));
    }
    if req.spot.iter().any(|s| !(*s > T::zero() && s.is_finite())) {
        return Err(Error::Parameter("spot prices must be positive".into()));
    }
    if !(req.maturity > T::zero() && req.maturity.is_finite()) {
        return Err(Error::Parameter("maturity must be positive".into()));
    }
    if req.rate < T::zero() || req.dividend < T::zero() {
        return Err(Error::Parameter("rates must be nonnegative".into()));
    }
    req.payoff.validate()?;
    req.quad.validate()
}

fn unit_directions<T: Real>(d: usize) -> Vec<Vec<T>> {
    match d {
        1 => vec![vec![T::one()], vec![-T::one()]],
        2 => (0..16)
            .map(|k| {
                let a = T::PI() * lit::<T>(k as f64 / 8.0);
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for i in -1i32..=1 {
                for j in -1i32..=1 {
                    for k in -1i32..=1 {
                        if i == 0 && j == 0 && k == 0 {
                            continue;
                        }
                        let v = [i, j, k].map(|x| lit::<T>(x as f64));
                        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                        out.push(v.iter().map(|x| *x / n).collect());
                    }
                }
            }
            out
        }
    }
}

/// Smallest log-log decay slope of `g` between radii 10 and 10⁴ over rays.
/// Peaks over a few radii near each end absorb oscillation.
pub(crate) fn tail_slope<T: Real>(d: usize, g: &dyn Fn(&[T]) -> T) -> f64 {
    let (r1, r2) = (10.0f64, 1.0e4f64);
    let mut worst = f64::INFINITY;
    for dir in unit_directions::<T>(d) {
        let peak = |r: f64| {
            (0..8)
                .map(|j| {
                    let rr = lit::<T>(r * (1.0 + j as f64 / 8.0));
                    let u: Vec<T> = dir.iter().map(|x| *x * rr).collect();
                    g(&u).to_f64().unwrap_or(f64::INFINITY)
                })
                .fold(0.0f64, f64::max)
        };
        let (m1, m2) = (peak(r1), peak(r2));
        let slope = if m2 == 0.0 {
            f64::INFINITY
        } else if m1 == 0.0 || !m1.is_finite() || !m2.is_finite() {
            f64::NEG_INFINITY
        } else {
            (m1 / m2).ln() / (r2 / r1).ln()
        };
        worst = worst.min(slope);
    }
    worst
}

fn has_decay_bound<T: Real>(model: &ModelSpec<T>, r: &[T], t: T) -> bool {
    match (model.envelope(r, T::zero(), t), model.envelope(r, lit(1e4), t)) {
        (Some(e0), Some(e1)) => e1 <= e0 * lit::<T>(1e-12),
        _ => false,
    }
}

fn check_integrability<T: Real>(model: &ModelSpec<T>, r: &[T], t: T) -> Integrability {
    if has_decay_bound(model, r, t) {
        return Integrability::DecayBound;
    }
    let d = model.dimension();
    let g = |u: &[T]| {
        let w: Vec<Complex<T>> = r.iter().zip(u).map(|(a, b)| cplx(*a, *b)).collect();
        model.mgf(&w, t).map(|v| v.norm()).unwrap_or(T::infinity())
    };
    let slope = tail_slope(d, &g);
    Integrability::Numerical {
        slope,
        passed: slope > d as f64 + 0.05,
    }
}

/// Verifies strips and selects the valuation mode.
pub fn check_conditions<T: Real>(req: &PriceRequest<T>) -> Result<Dispatch<T>> {
    validate(req)?;
    let d = req.payoff.dimension();
    let damping = match &req.damping {
        Some(r) => {
            let ps = req.payoff.strip();
            let ms = req.model.moment_strip(req.maturity);
            if r.len() != d {
                return Err(Error::Parameter(format!("damping has dimension {}, expected {d}", r.len())));
            }
            if !ps.contains(r) || !ms.contains(r) {
                return Err(Error::Infeasible(format!(
                    "damping {r:?} must lie in the payoff strip ({ps}) and the model strip ({ms})"
                )));
            }
            r.clone()
        }
        None => select_damping(&req.payoff, &req.model, req.maturity)?,
    };
    let regularity = req.payoff.regularity();
    let (mode, integrability) = if d == 1 {
        match regularity {
            Regularity::ContinuousIntegrable => (Mode::Lebesgue1d, None),
            Regularity::DiscontinuousL1 => (Mode::CappedPointwise1d, None),
        }
    } else {
        match regularity {
            Regularity::ContinuousIntegrable => {
                let check = check_integrability(&req.model, &damping, req.maturity);
                let ok = matches!(
                    check,
                    Integrability::DecayBound | Integrability::Numerical { passed: true, .. }
                );
                (if ok { Mode::LebesgueNd } else { Mode::L2CappedNd }, Some(check))
            }
            Regularity::DiscontinuousL1 => (Mode::L2CappedNd, None),
        }
    };
    let windowed = d == 1 && req.model.envelope(&damping, T::zero(), req.maturity).is_some()
        && !has_decay_bound(&req.model, &damping, req.maturity);
    Ok(Dispatch {
        mode,
        damping,
        midpoint_at_atoms: mode == Mode::CappedPointwise1d && !req.model.is_atomless(),
        windowed,
        integrability,
    })
}

/// Angular frequency of the integrand: model phase plus spot/level offsets.
fn omega<T: Real>(req: &PriceRequest<T>, payoffs: &[PayoffSpec<T>], r: &[T]) -> T {
    let mut w = req.model.frequency_hint(r, req.maturity);
    let mut off = T::zero();
    for p in payoffs {
        for (j, levels) in p.log_levels().iter().enumerate() {
            for l in levels {
                off = off.max((req.spot[j].ln() - *l).abs());
            }
        }
    }
    w += off;
    w
}

fn ridges<T: Real>(p: &PayoffSpec<T>) -> Vec<Vec<T>> {
    let d = p.dimension();
    let mut out: Vec<Vec<T>> = (0..d)
        .map(|k| (0..d).map(|j| if j == k { T::one() } else { T::zero() }).collect())
        .collect();
    if matches!(p, PayoffSpec::MinCall { .. } | PayoffSpec::MaxPut { .. }) {
        out.push(vec![T::one(); d]);
    }
    out
}

fn probe_points<T: Real>(d: usize) -> Vec<Vec<T>> {
    let vals = [0.37, 1.9, 7.3, 23.1];
    let mut out = Vec::new();
    for (i, a) in vals.iter().enumerate() {
        let mut u = vec![lit::<T>(*a); d];
        for (j, x) in u.iter_mut().enumerate() {
            *x *= lit::<T>(1.0 + 0.3 * ((i + j) % 3) as f64) * if j % 2 == 1 { -T::one() } else { T::one() };
        }
        out.push(u);
    }
    out
}

fn hermitian_residual<T: Real>(h: &Integrand<'_, T>, d: usize, m: usize) -> T {
    let mut a = vec![Complex::new(T::zero(), T::zero()); m];
    let mut b = a.clone();
    let mut worst = T::zero();
    for u in probe_points::<T>(d) {
        let neg: Vec<T> = u.iter().map(|x| -*x).collect();
        h.eval(&u, &mut a);
        h.eval(&neg, &mut b);
        for k in 0..m {
            let den = a[k].norm().max(T::min_positive_value());
            if a[k].norm() > T::zero() {
                worst = worst.max((b[k] - a[k].conj()).norm() / den);
            }
        }
    }
    worst
}

struct Evaluation<T> {
    values: Vec<T>,
    converged: Vec<bool>,
    errors: Vec<T>,
    caps: Vec<Option<CapResult<T>>>,
    nodes: usize,
    residual: T,
}

fn evaluate<T: Real>(
    req: &PriceRequest<T>,
    payoffs: &[PayoffSpec<T>],
    disp: &Dispatch<T>,
    weight: Weight,
    cache: bool,
) -> Result<Evaluation<T>> {
    let d = req.payoff.dimension();
    let m = payoffs.len();
    let two_pi = lit::<T>(2.0) * T::PI();
    let scale = (-req.rate * req.maturity).exp() / two_pi.powi(d as i32);
    let h = Integrand {
        model: &req.model,
        payoffs,
        log_spot: req.spot.iter().map(|s| s.ln()).collect(),
        damping: &disp.damping,
        maturity: req.maturity,
        scale,
        weight,
        cache,
        failure: RefCell::new(None),
    };
    let residual = hermitian_residual(&h, d, m);
    if let Some(e) = h.take_failure() {
        return Err(e);
    }
    if residual > lit(1e-6) {
        return Err(Error::Numerical(format!(
            "integrand violates Hermitian symmetry (relative residual {residual:e})"
        )));
    }
    let om = omega(req, payoffs, &disp.damping);
    let r = &disp.damping;
    let log_spot = &h.log_spot;
    let envelope_fn = |x: T| -> T {
        let em = req.model.envelope(r, x, req.maturity).unwrap_or(T::infinity());
        let ef = payoffs
            .iter()
            .map(|p| p.envelope(r[0], x).unwrap_or(T::infinity()))
            .fold(T::zero(), T::max);
        scale * (r[0] * log_spot[0]).exp() * em * ef
    };
    let use_envelope = d == 1 && weight == Weight::Price && req.model.envelope(r, T::zero(), req.maturity).is_some();
    let opts = LineOptions {
        hermitian: true,
        omega: Some(om),
        breakpoints: Vec::new(),
        envelope: if use_envelope { Some(&envelope_fn) } else { None },
    };
    let mut caps = vec![None; m];
    let (values, errors, converged, nodes) = match disp.mode {
        Mode::Lebesgue1d if !disp.windowed => {
            let mut f = |u: T, out: &mut [Complex<T>]| h.eval(&[u], out);
            let o = quadrature::line_vec(&mut f, m, &opts, &req.quad);
            let conv = vec![o.converged; m];
            (o.values.iter().map(|v| v.re).collect::<Vec<T>>(), o.error, conv, o.nodes)
        }
        Mode::Lebesgue1d | Mode::CappedPointwise1d => {
            let mut f = |u: T, out: &mut [Complex<T>]| h.eval(&[u], out);
            let (res, nodes) = quadrature::capped_vec(&mut f, m, &opts, &req.quad);
            let vals = res.iter().map(|c| c.value.re).collect();
            let errs = res.iter().map(|c| c.oscillation_amplitude).collect();
            let conv = res.iter().map(|c| c.converged).collect();
            for (slot, c) in caps.iter_mut().zip(res) {
                *slot = Some(c);
            }
            (vals, errs, conv, nodes)
        }
        Mode::LebesgueNd => {
            let rid = ridges(&req.payoff);
            let mut f = |u: &[T], out: &mut [Complex<T>]| h.eval(u, out);
            let (o, leaves) = quadrature::nd_vec(&mut f, d, m, true, Some(om), &rid, &req.quad);
            let conv = vec![o.converged; m];
            (o.values.iter().map(|v| v.re).collect(), o.error, conv, leaves)
        }
        Mode::L2CappedNd => {
            let mut f = |u: &[T], out: &mut [Complex<T>]| h.eval(u, out);
            let res = quadrature::cube_vec(&mut f, d, m, true, Some(om), &req.quad)?;
            let nodes = res.first().map_or(0, |c| c.nodes);
            let vals = res.iter().map(|c| c.value.re).collect();
            let errs = res.iter().map(|c| c.oscillation_amplitude).collect();
            let conv = res.iter().map(|c| c.converged).collect();
            for (slot, c) in caps.iter_mut().zip(res) {
                *slot = Some(c);
            }
            (vals, errs, conv, nodes)
        }
    };
    if let Some(e) = h.take_failure() {
        return Err(e);
    }
    Ok(Evaluation {
        values,
        converged,
        errors,
        caps,
        nodes,
        residual,
    })
}

fn finalize<T: Real>(
    value: T,
    error: T,
    converged: bool,
    cap: Option<CapResult<T>>,
    nodes: usize,
    residual: T,
    disp: &Dispatch<T>,
    quad: &QuadConfig<T>,
    clamp: bool,
) -> Result<PriceResult<T>> {
    if !value.is_finite() {
        return Err(Error::Numerical("price integral is not finite".into()));
    }
    let mut value = value;
    if clamp && value < T::zero() {
        if value >= -lit::<T>(10.0) * quad.abs_tol {
            value = T::zero();
        } else {
            return Err(Error::Numerical(format!("negative price {value:e} beyond tolerance")));
        }
    }
    if !converged && cap.is_none() {
        return Err(Error::Accuracy {
            estimate: value.to_f64().unwrap_or(f64::NAN),
            error: error.to_f64().unwrap_or(f64::NAN),
            nodes,
        });
    }
    Ok(PriceResult {
        value,
        mode: disp.mode,
        damping_used: disp.damping.clone(),
        converged,
        diagnostics: Diagnostics {
            nodes,
            error_estimate: error,
            hermitian_residual: residual,
            cap,
            midpoint_at_atoms: disp.midpoint_at_atoms,
            windowed: disp.windowed,
            integrability: disp.integrability,
        },
    })
}

/// Prices one request.
pub fn price<T: Real>(req: &PriceRequest<T>) -> Result<PriceResult<T>> {
    let disp = check_conditions(req)?;
    let ev = evaluate(req, std::slice::from_ref(&req.payoff), &disp, Weight::Price, true)?;
    let cap = ev.caps.into_iter().next().flatten();
    finalize(ev.values[0], ev.errors[0], ev.converged[0], cap, ev.nodes, ev.residual, &disp, &req.quad, true)
}

/// Prices `req.payoff.with_strike(K)` for every `K` on one shared node set.
///
/// With `cache` the model factor is evaluated once per node for all strikes;
/// without it, once per node and strike. Both produce identical numbers.
pub fn price_strikes<T: Real>(req: &PriceRequest<T>, strikes: &[T], cache: bool) -> Result<Vec<Result<PriceResult<T>>>> {
    if strikes.is_empty() {
        return Ok(Vec::new());
    }
    let payoffs: Vec<PayoffSpec<T>> = strikes.iter().map(|k| req.payoff.with_strike(*k)).collect();
    let mut base = req.clone();
    base.payoff = payoffs[0].clone();
    let disp = check_conditions(&base)?;
    for p in &payoffs {
        p.validate()?;
    }
    let ev = evaluate(&base, &payoffs, &disp, Weight::Price, cache)?;
    let nodes = ev.nodes;
    Ok(ev
        .values
        .iter()
        .zip(ev.errors.iter())
        .zip(ev.converged.iter())
        .zip(ev.caps)
        .map(|(((v, e), c), cap)| finalize(*v, *e, *c, cap, nodes, ev.residual, &disp, &req.quad, true))
        .collect())
}

/// Integrability of `(1+|u|^k)|M(R−iu)||f̂(u+iR)|`, fitted on a log grid.
pub(crate) fn greek_tail_slope<T: Real>(req: &PriceRequest<T>, r: T, order: i32) -> f64 {
    let g = |u: &[T]| {
        let w = cplx(r, -u[0]);
        let m = req.model.mgf(&[w], req.maturity).map(|v| v.norm()).unwrap_or(T::infinity());
        let f = req.payoff.fhat(&[cplx(u[0], r)]).norm();
        (T::one() + u[0].abs().powi(order)) * m * f
    };
    tail_slope(1, &g)
}

fn greek<T: Real>(req: &PriceRequest<T>, weight: Weight, order: i32) -> Result<T> {
    if req.payoff.dimension() != 1 {
        return Err(Error::Precondition("Greeks are implemented for single-asset payoffs".into()));
    }
    let disp = check_conditions(req)?;
    let slope = greek_tail_slope(req, disp.damping[0], order);
    if !(slope > 1.05) {
        return Err(Error::Precondition(format!(
            "(1+|u|^{order})|M(R-iu)||f^(u+iR)| is not integrable (fitted tail exponent {slope:.3})"
        )));
    }
    let ev = evaluate(req, std::slice::from_ref(&req.payoff), &disp, weight, true)?;
    let cap = ev.caps.into_iter().next().flatten();
    let r = finalize(ev.values[0], ev.errors[0], ev.converged[0], cap, ev.nodes, ev.residual, &disp, &req.quad, false)?;
    if !r.converged {
        return Err(Error::Accuracy {
            estimate: r.value.to_f64().unwrap_or(f64::NAN),
            error: ev.errors[0].to_f64().unwrap_or(f64::NAN),
            nodes: ev.nodes,
        });
    }
    Ok(r.value)
}

/// `∂V/∂S₀`.
pub fn delta<T: Real>(req: &PriceRequest<T>) -> Result<T> {
    greek(req, Weight::Delta, 1)
}

/// `∂²V/∂S₀²`.
pub fn gamma<T: Real>(req: &PriceRequest<T>) -> Result<T> {
    greek(req, Weight::Gamma, 2)
}

#[cfg(test)]
mod tests;
