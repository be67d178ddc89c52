use crate::error::{Error, Result};
use crate::models::{ModelSpec, MomentStrip};
use crate::scalar::{lit, Real};

use super::PayoffSpec;

pub type DampingVector<T> = Vec<T>;

/// Pick `R` inside both the payoff strip and the model's moment strip.
///
/// The payoff default is used when admissible. Otherwise a one-dimensional
/// problem takes the middle of the intersection, and a multivariate one
/// retreats from the default towards the model strip's centre.
pub fn select_damping<T: Real>(
    payoff: &PayoffSpec<T>,
    model: &ModelSpec<T>,
    maturity: T,
) -> Result<DampingVector<T>> {
    let d = payoff.dimension();
    if d != model.dimension() {
        return Err(Error::Parameter(format!(
            "payoff has dimension {d} but model {} has dimension {}",
            model.kind_name(),
            model.dimension()
        )));
    }
    let pstrip = payoff.strip();
    let mstrip = model.moment_strip(maturity);
    let ok = |r: &[T]| pstrip.contains(r) && mstrip.contains_interior(r);
    let r0 = payoff.default_damping();
    if ok(&r0) {
        return Ok(r0);
    }
    let infeasible = || {
        Error::Infeasible(format!(
            "no damping in both the payoff strip ({pstrip}) and the model strip ({mstrip})"
        ))
    };

    if d == 1 {
        let (mlo, mhi) = match &mstrip {
            MomentStrip::Interval { lo, hi } => (*lo, *hi),
            _ => (T::neg_infinity(), T::infinity()),
        };
        let (plo, phi) = pstrip.bounds[0];
        let mut pieces = vec![(plo.max(mlo), phi.min(mhi))];
        if pstrip.excludes_zero {
            let (l, h) = pieces[0];
            pieces = vec![(l, h.min(T::zero())), (l.max(T::zero()), h)];
            // Try the half with the same sign as the default first.
            if r0[0] > T::zero() {
                pieces.reverse();
            }
        }
        let step: T = lit(0.75);
        let half: T = lit(0.5);
        for (l, h) in pieces {
            if l >= h {
                continue;
            }
            let x = if l.is_finite() && h.is_finite() {
                half * (l + h)
            } else if r0[0] > l && r0[0] < h {
                r0[0]
            } else if l.is_finite() {
                l + step
            } else {
                h - step
            };
            if ok(&[x]) {
                return Ok(vec![x]);
            }
        }
        return Err(infeasible());
    }

    let target = mstrip.center().unwrap_or_else(|| vec![T::zero(); d]);
    let steps = 256;
    for k in 1..=steps {
        let w = T::from_usize(k).unwrap() / T::from_usize(steps).unwrap();
        let r: Vec<T> = r0
            .iter()
            .zip(&target)
            .map(|(&a, &b)| a + (b - a) * w)
            .collect();
        if ok(&r) {
            return Ok(r);
        }
    }
    if d == 2 {
        // Coarse scan for the admissible point nearest the default.
        let n = 161;
        let span: T = lit(8.0);
        let mut best: Option<(T, Vec<T>)> = None;
        for i in 0..n {
            for j in 0..n {
                let a = r0[0] - span + span * lit::<T>(2.0 * i as f64 / (n - 1) as f64);
                let b = r0[1] - span + span * lit::<T>(2.0 * j as f64 / (n - 1) as f64);
                let dist = (a - r0[0]).powi(2) + (b - r0[1]).powi(2);
                if best.as_ref().is_none_or(|(bd, _)| dist < *bd) && ok(&[a, b]) {
                    best = Some((dist, vec![a, b]));
                }
            }
        }
        if let Some((_, r)) = best {
            return Ok(r);
        }
    }
    Err(infeasible())
}
