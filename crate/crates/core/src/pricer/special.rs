use num_complex::Complex;

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::payoffs::PayoffSpec;
use crate::quadrature::{self, LineOptions, QuadConfig};
use crate::scalar::{cplx, lit, Real};

use super::{check_conditions, price, Mode, PriceRequest, PriceResult};

/// Call on the minimum of two assets via the closed two-asset integrand
/// `S₁^{w₁} S₂^{w₂} M(w) K^{1−w₁−w₂} / (w₁ w₂ (w₁+w₂−1))`, `w = R + iu`.
/// The value is undiscounted.
#[allow(clippy::too_many_arguments)]
pub fn price_min_two<T: Real>(
    s01: T,
    s02: T,
    strike: T,
    model: &ModelSpec<T>,
    maturity: T,
    r1: T,
    r2: T,
    quad: &QuadConfig<T>,
) -> Result<T> {
    quad.validate()?;
    if model.dimension() != 2 {
        return Err(Error::Parameter(format!(
            "two-asset minimum needs a bivariate model, got dimension {}",
            model.dimension()
        )));
    }
    for (name, v) in [("S01", s01), ("S02", s02), ("strike", strike), ("maturity", maturity)] {
        if !(v > T::zero() && v.is_finite()) {
            return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
        }
    }
    let strip = model.moment_strip(maturity);
    if !(r1 > T::zero() && r2 > T::zero() && r1 + r2 > T::one()) || !strip.contains(&[r1, r2]) {
        return Err(Error::Infeasible(format!(
            "damping ({r1}, {r2}) needs R1, R2 > 0, R1 + R2 > 1 and membership in the model strip ({strip})"
        )));
    }
    let (l1, l2, lk) = (s01.ln(), s02.ln(), strike.ln());
    let scale = T::one() / (lit::<T>(4.0) * T::PI() * T::PI());
    let mut failure: Option<Error> = None;
    let mut h = |u: &[T], out: &mut [Complex<T>]| {
        let w1 = cplx(r1, u[0]);
        let w2 = cplx(r2, u[1]);
        let m = match model.mgf(&[w1, w2], maturity) {
            Ok(v) if v.re.is_finite() && v.im.is_finite() => v,
            Ok(_) => {
                failure.get_or_insert(Error::Numerical("characteristic function is not finite".into()));
                Complex::new(T::zero(), T::zero())
            }
            Err(e) => {
                failure.get_or_insert(e);
                Complex::new(T::zero(), T::zero())
            }
        };
        let w = w1 + w2;
        let num = (w1 * l1 + w2 * l2 + (-w + T::one()) * lk).exp() * m * scale;
        out[0] = num / (w1 * w2 * (w - T::one()));
    };
    let omega = model.frequency_hint(&[r1, r2], maturity) + (l1 - lk).abs().max((l2 - lk).abs());
    let ridges = vec![
        vec![T::one(), T::zero()],
        vec![T::zero(), T::one()],
        vec![T::one(), T::one()],
    ];
    let (o, leaves) = quadrature::nd_vec(&mut h, 2, 1, true, Some(omega), &ridges, quad);
    if let Some(e) = failure {
        return Err(e);
    }
    if !o.converged {
        return Err(Error::Accuracy {
            estimate: o.values[0].re.to_f64().unwrap_or(f64::NAN),
            error: o.error[0].to_f64().unwrap_or(f64::NAN),
            nodes: leaves,
        });
    }
    Ok(o.values[0].re)
}

/// One-sided limits of the digital-call value at a barrier and the value
/// returned by the capped formula there.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointCheck<T> {
    /// `e^{−rT} P(X_T ≥ log B − log S₀)`.
    pub left: T,
    /// `e^{−rT} P(X_T > log B − log S₀)`.
    pub right: T,
    pub capped: PriceResult<T>,
}

/// Compares the capped digital-call price with the exact one-sided limits.
///
/// Compound Poisson laws with a single jump size are handled by lattice sums;
/// for atomless laws with a decaying characteristic function both limits are
/// the absolutely convergent integral.
pub fn digital_value_midpoint_check<T: Real>(
    model: &ModelSpec<T>,
    spot: T,
    barrier: T,
    maturity: T,
    rate: T,
    quad: &QuadConfig<T>,
) -> Result<MidpointCheck<T>> {
    let mut req = PriceRequest::new(vec![spot], PayoffSpec::DigitalCall { barrier }, model.clone(), maturity);
    req.rate = rate;
    req.quad = quad.clone();
    let capped = price(&req)?;
    let disc = (-rate * maturity).exp();
    let c = barrier.ln() - spot.ln();
    let (left, right) = match model {
        ModelSpec::CompoundPoissonDrift1d(tr) if !tr.has_diffusion() => {
            if tr.jumps.len() != 1 {
                return Err(Error::Precondition(
                    "lattice limits need a single jump size".into(),
                ));
            }
            let (x, lam) = (tr.jumps[0].size[0], tr.jumps[0].intensity);
            let base = (tr.drift[0] - lam * x) * maturity;
            let (ge, gt) = lattice_tails(base, x, lam * maturity, c);
            (disc * ge, disc * gt)
        }
        _ if model.is_atomless() => {
            let v = lebesgue_value(&req)?;
            (v, v)
        }
        _ => {
            return Err(Error::Precondition(format!(
                "no one-sided limits available for {}",
                model.kind_name()
            )))
        }
    };
    Ok(MidpointCheck { left, right, capped })
}

/// `(P(b + xN ≥ c), P(b + xN > c))` for `N ~ Poisson(mean)`.
fn lattice_tails<T: Real>(b: T, x: T, mean: T, c: T) -> (T, T) {
    let eps: T = lit(1e-9);
    let m = mean.to_f64().unwrap_or(0.0);
    let n_max = (m + 40.0 * m.sqrt() + 60.0).ceil() as usize;
    let mut p = (-mean).exp();
    let (mut ge, mut gt) = (T::zero(), T::zero());
    for n in 0..=n_max {
        if n > 0 {
            p = p * mean / T::from_usize(n).unwrap();
        }
        let v = b + x * T::from_usize(n).unwrap();
        if v >= c - eps {
            ge += p;
        }
        if v > c + eps {
            gt += p;
        }
    }
    (ge, gt)
}

/// Digital value as the integral over ℝ, valid when `M(R+i·)` is integrable.
fn lebesgue_value<T: Real>(req: &PriceRequest<T>) -> Result<T> {
    let disp = check_conditions(req)?;
    let r = disp.damping[0];
    let model = &req.model;
    let payoff = &req.payoff;
    let t = req.maturity;
    let ls = req.spot[0].ln();
    let scale = (-req.rate * t).exp() / (lit::<T>(2.0) * T::PI());
    let mut failure: Option<Error> = None;
    let mut h = |u: T, out: &mut [Complex<T>]| {
        let w = cplx(r, u);
        out[0] = match model.mgf(&[w], t) {
            Ok(m) => (w * ls).exp() * m * payoff.fhat(&[cplx(-u, r)]) * scale,
            Err(e) => {
                failure.get_or_insert(e);
                Complex::new(T::zero(), T::zero())
            }
        };
    };
    let omega = model.frequency_hint(&[r], t) + (ls - payoff.log_levels()[0][0]).abs();
    let opts = LineOptions {
        hermitian: true,
        omega: Some(omega),
        ..LineOptions::default()
    };
    let o = quadrature::line_vec(&mut h, 1, &opts, &req.quad);
    if let Some(e) = failure {
        return Err(e);
    }
    if !o.converged {
        return Err(Error::Accuracy {
            estimate: o.values[0].re.to_f64().unwrap_or(f64::NAN),
            error: o.error[0].to_f64().unwrap_or(f64::NAN),
            nodes: o.nodes,
        });
    }
    debug_assert!(disp.mode == Mode::CappedPointwise1d);
    Ok(o.values[0].re)
}
