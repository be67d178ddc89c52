//! Payoff functions in log-coordinates and their analytic Fourier transforms.
//!
//! For a payoff `f(x)` the transform is `f̂(z) = ∫ e^{izx} f(x) dx`, defined on
//! a horizontal strip of `Im z`. Pricing evaluates it at `z = iR − u`, so the
//! damping vector `R` has to lie inside that strip.

mod damping;

use std::fmt;

use num_complex::Complex;

pub use damping::{select_damping, DampingVector};

use crate::error::{Error, Result};
use crate::scalar::{cplx, lit, real, Real};

#[derive(Debug, Clone, PartialEq)]
pub enum PayoffSpec<T> {
    Call { strike: T },
    Put { strike: T },
    DigitalCall { barrier: T },
    DigitalPut { barrier: T },
    AssetOrNothingCall { barrier: T },
    DoubleDigital { low: T, high: T },
    SelfQuantoCall { strike: T },
    PowerCall2 { strike: T },
    MinCall { strike: T, assets: usize },
    MaxPut { strike: T, assets: usize },
    /// `f(x) = Π f_i(x_i)` of one-dimensional factors.
    Product(Vec<PayoffSpec<T>>),
}

/// Which valuation theorem a (dampened) payoff qualifies for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    /// Bounded, continuous, integrable after damping, with integrable transform.
    ContinuousIntegrable,
    /// Only integrable after damping; needs the capped-limit formulas.
    DiscontinuousL1,
}

/// Open region of admissible `Im z`: a box of open intervals, optionally
/// cut by `Σ Im z_k > sum_above` and with the origin removed.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffStrip<T> {
    pub bounds: Vec<(T, T)>,
    pub sum_above: Option<T>,
    pub excludes_zero: bool,
}

impl<T: Real> PayoffStrip<T> {
    pub fn contains(&self, im: &[T]) -> bool {
        if im.len() != self.bounds.len() {
            return false;
        }
        let in_box = im
            .iter()
            .zip(&self.bounds)
            .all(|(&x, &(lo, hi))| x > lo && x < hi);
        let sum_ok = self
            .sum_above
            .is_none_or(|s| im.iter().fold(T::zero(), |a, &b| a + b) > s);
        let zero_ok = !self.excludes_zero || im.iter().any(|x| !x.is_zero());
        in_box && sum_ok && zero_ok
    }
}

impl<T: Real> fmt::Display for PayoffStrip<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .bounds
            .iter()
            .enumerate()
            .map(|(k, (lo, hi))| format!("Im z_{} in ({lo}, {hi})", k + 1))
            .collect();
        write!(f, "{}", parts.join(", "))?;
        if let Some(s) = self.sum_above {
            write!(f, ", sum Im z_k > {s}")?;
        }
        if self.excludes_zero {
            write!(f, ", Im z != 0")?;
        }
        Ok(())
    }
}

/// Borrowed view bundling a payoff's transform, strip and regularity.
#[derive(Debug, Clone, Copy)]
pub struct PayoffTransform<'a, T> {
    spec: &'a PayoffSpec<T>,
}

impl<T: Real> PayoffTransform<'_, T> {
    pub fn evaluate(&self, z: &[Complex<T>]) -> Complex<T> {
        self.spec.fhat(z)
    }

    pub fn strip(&self) -> PayoffStrip<T> {
        self.spec.strip()
    }

    pub fn regularity(&self) -> Regularity {
        self.spec.regularity()
    }
}

#[inline]
fn pow_c<T: Real>(base_ln: T, w: Complex<T>) -> Complex<T> {
    (w * base_ln).exp()
}

impl<T: Real> PayoffSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            PayoffSpec::Call { strike }
            | PayoffSpec::Put { strike }
            | PayoffSpec::SelfQuantoCall { strike }
            | PayoffSpec::PowerCall2 { strike } => pos("strike", *strike),
            PayoffSpec::DigitalCall { barrier }
            | PayoffSpec::DigitalPut { barrier }
            | PayoffSpec::AssetOrNothingCall { barrier } => pos("barrier", *barrier),
            PayoffSpec::DoubleDigital { low, high } => {
                pos("low barrier", *low)?;
                pos("high barrier", *high)?;
                if low < high {
                    Ok(())
                } else {
                    Err(Error::Parameter("double digital needs low < high".into()))
                }
            }
            PayoffSpec::MinCall { strike, assets } | PayoffSpec::MaxPut { strike, assets } => {
                pos("strike", *strike)?;
                if *assets == 0 {
                    Err(Error::Parameter("number of assets must be at least 1".into()))
                } else {
                    Ok(())
                }
            }
            PayoffSpec::Product(factors) => {
                if factors.is_empty() {
                    return Err(Error::Parameter("product payoff needs factors".into()));
                }
                for f in factors {
                    if f.dimension() != 1 {
                        return Err(Error::Parameter(
                            "product factors must be single-asset payoffs".into(),
                        ));
                    }
                    f.validate()?;
                }
                Ok(())
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PayoffSpec::Call { .. } => "Call",
            PayoffSpec::Put { .. } => "Put",
            PayoffSpec::DigitalCall { .. } => "DigitalCall",
            PayoffSpec::DigitalPut { .. } => "DigitalPut",
            PayoffSpec::AssetOrNothingCall { .. } => "AssetOrNothingCall",
            PayoffSpec::DoubleDigital { .. } => "DoubleDigital",
            PayoffSpec::SelfQuantoCall { .. } => "SelfQuantoCall",
            PayoffSpec::PowerCall2 { .. } => "PowerCall2",
            PayoffSpec::MinCall { .. } => "MinCall",
            PayoffSpec::MaxPut { .. } => "MaxPut",
            PayoffSpec::Product(_) => "Product",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            PayoffSpec::MinCall { assets, .. } | PayoffSpec::MaxPut { assets, .. } => *assets,
            PayoffSpec::Product(f) => f.len(),
            _ => 1,
        }
    }

    pub fn transform(&self) -> PayoffTransform<'_, T> {
        PayoffTransform { spec: self }
    }

    pub fn regularity(&self) -> Regularity {
        match self {
            PayoffSpec::Call { .. }
            | PayoffSpec::Put { .. }
            | PayoffSpec::SelfQuantoCall { .. }
            | PayoffSpec::PowerCall2 { .. }
            | PayoffSpec::MinCall { .. }
            | PayoffSpec::MaxPut { .. } => Regularity::ContinuousIntegrable,
            PayoffSpec::DigitalCall { .. }
            | PayoffSpec::DigitalPut { .. }
            | PayoffSpec::AssetOrNothingCall { .. }
            | PayoffSpec::DoubleDigital { .. } => Regularity::DiscontinuousL1,
            PayoffSpec::Product(f) => {
                if f.iter().all(|p| p.regularity() == Regularity::ContinuousIntegrable) {
                    Regularity::ContinuousIntegrable
                } else {
                    Regularity::DiscontinuousL1
                }
            }
        }
    }

    pub fn strip(&self) -> PayoffStrip<T> {
        let inf = T::infinity();
        let one = T::one();
        let two: T = lit(2.0);
        let single = |lo: T, hi: T| PayoffStrip {
            bounds: vec![(lo, hi)],
            sum_above: None,
            excludes_zero: false,
        };
        match self {
            PayoffSpec::Call { .. } | PayoffSpec::AssetOrNothingCall { .. } => single(one, inf),
            PayoffSpec::Put { .. } | PayoffSpec::DigitalPut { .. } => single(-inf, T::zero()),
            PayoffSpec::DigitalCall { .. } => single(T::zero(), inf),
            PayoffSpec::DoubleDigital { .. } => PayoffStrip {
                bounds: vec![(-inf, inf)],
                sum_above: None,
                excludes_zero: true,
            },
            PayoffSpec::SelfQuantoCall { .. } | PayoffSpec::PowerCall2 { .. } => single(two, inf),
            PayoffSpec::MinCall { assets, .. } => PayoffStrip {
                bounds: vec![(T::zero(), inf); *assets],
                sum_above: Some(one),
                excludes_zero: false,
            },
            PayoffSpec::MaxPut { assets, .. } => PayoffStrip {
                bounds: vec![(-inf, T::zero()); *assets],
                sum_above: None,
                excludes_zero: false,
            },
            PayoffSpec::Product(f) => {
                // Each factor is one-dimensional; a factor that removes the
                // origin (double digital) only constrains its own coordinate,
                // so its interval is approximated by the positive half.
                let bounds = f
                    .iter()
                    .map(|p| {
                        let s = p.strip();
                        if s.excludes_zero {
                            (T::zero(), inf)
                        } else {
                            s.bounds[0]
                        }
                    })
                    .collect();
                PayoffStrip {
                    bounds,
                    sum_above: None,
                    excludes_zero: false,
                }
            }
        }
    }

    /// Analytic transform `f̂(z)`.
    pub fn fhat(&self, z: &[Complex<T>]) -> Complex<T> {
        let i = cplx(T::zero(), T::one());
        let one = real(T::one());
        let two = real(lit::<T>(2.0));
        match self {
            PayoffSpec::Call { strike } | PayoffSpec::Put { strike } => {
                let iz = i * z[0];
                pow_c(strike.ln(), one + iz) / (iz * (one + iz))
            }
            PayoffSpec::DigitalCall { barrier } => {
                let iz = i * z[0];
                -pow_c(barrier.ln(), iz) / iz
            }
            PayoffSpec::DigitalPut { barrier } => {
                let iz = i * z[0];
                pow_c(barrier.ln(), iz) / iz
            }
            PayoffSpec::AssetOrNothingCall { barrier } => {
                let iz = i * z[0];
                -pow_c(barrier.ln(), one + iz) / (one + iz)
            }
            PayoffSpec::DoubleDigital { low, high } => {
                let iz = i * z[0];
                (pow_c(high.ln(), iz) - pow_c(low.ln(), iz)) / iz
            }
            PayoffSpec::SelfQuantoCall { strike } => {
                let iz = i * z[0];
                pow_c(strike.ln(), two + iz) / ((one + iz) * (two + iz))
            }
            PayoffSpec::PowerCall2 { strike } => {
                let iz = i * z[0];
                -pow_c(strike.ln(), two + iz) * lit::<T>(2.0) / (iz * (one + iz) * (two + iz))
            }
            PayoffSpec::MinCall { strike, assets } => {
                let (sum, prod) = sum_prod(&z[..*assets]);
                let w = one + i * sum;
                let sign = if assets % 2 == 0 { T::one() } else { -T::one() };
                -pow_c(strike.ln(), w) / (w * prod * sign)
            }
            PayoffSpec::MaxPut { strike, assets } => {
                let (sum, prod) = sum_prod(&z[..*assets]);
                let w = one + i * sum;
                pow_c(strike.ln(), w) / (w * prod)
            }
            PayoffSpec::Product(f) => f
                .iter()
                .zip(z)
                .fold(one, |acc, (p, zk)| acc * p.fhat(std::slice::from_ref(zk))),
        }
    }

    /// Pointwise payoff at log-prices `x`.
    pub fn payoff_eval(&self, x: &[T]) -> T {
        let zero = T::zero();
        let ind = |b: bool| if b { T::one() } else { zero };
        match self {
            PayoffSpec::Call { strike } => (x[0].exp() - *strike).max(zero),
            PayoffSpec::Put { strike } => (*strike - x[0].exp()).max(zero),
            PayoffSpec::DigitalCall { barrier } => ind(x[0].exp() > *barrier),
            PayoffSpec::DigitalPut { barrier } => ind(x[0].exp() < *barrier),
            PayoffSpec::AssetOrNothingCall { barrier } => {
                let s = x[0].exp();
                s * ind(s > *barrier)
            }
            PayoffSpec::DoubleDigital { low, high } => {
                let s = x[0].exp();
                ind(*low < s && s < *high)
            }
            PayoffSpec::SelfQuantoCall { strike } => {
                let s = x[0].exp();
                s * (s - *strike).max(zero)
            }
            PayoffSpec::PowerCall2 { strike } => {
                let c = (x[0].exp() - *strike).max(zero);
                c * c
            }
            PayoffSpec::MinCall { strike, assets } => {
                let m = x[..*assets].iter().fold(T::infinity(), |a, &b| a.min(b));
                (m.exp() - *strike).max(zero)
            }
            PayoffSpec::MaxPut { strike, assets } => {
                let m = x[..*assets].iter().fold(T::neg_infinity(), |a, &b| a.max(b));
                (*strike - m.exp()).max(zero)
            }
            PayoffSpec::Product(f) => f
                .iter()
                .zip(x)
                .fold(T::one(), |acc, (p, xk)| acc * p.payoff_eval(std::slice::from_ref(xk))),
        }
    }

    /// Upper bound of `|f̂(u+iR)|` in terms of `|u|` (one-dimensional payoffs).
    pub fn envelope(&self, r: T, u_norm: T) -> Option<T> {
        let u2 = u_norm * u_norm;
        let m = |a: T| ((a - r) * (a - r) + u2).sqrt();
        let two: T = lit(2.0);
        let v = match self {
            PayoffSpec::Call { strike } | PayoffSpec::Put { strike } => {
                strike.powf(T::one() - r) / (m(T::zero()) * m(T::one()))
            }
            PayoffSpec::DigitalCall { barrier } | PayoffSpec::DigitalPut { barrier } => {
                barrier.powf(-r) / m(T::zero())
            }
            PayoffSpec::AssetOrNothingCall { barrier } => barrier.powf(T::one() - r) / m(T::one()),
            PayoffSpec::DoubleDigital { low, high } => {
                (low.powf(-r) + high.powf(-r)) / m(T::zero())
            }
            PayoffSpec::SelfQuantoCall { strike } => {
                strike.powf(two - r) / (m(T::one()) * m(two))
            }
            PayoffSpec::PowerCall2 { strike } => {
                two * strike.powf(two - r) / (m(T::zero()) * m(T::one()) * m(two))
            }
            PayoffSpec::MinCall { strike, assets: 1 } | PayoffSpec::MaxPut { strike, assets: 1 } => {
                strike.powf(T::one() - r) / (m(T::zero()) * m(T::one()))
            }
            _ => return None,
        };
        Some(v)
    }

    /// Log-strikes/barriers per coordinate; they set the oscillation of the
    /// pricing integrand in each direction.
    pub fn log_levels(&self) -> Vec<Vec<T>> {
        match self {
            PayoffSpec::Call { strike }
            | PayoffSpec::Put { strike }
            | PayoffSpec::SelfQuantoCall { strike }
            | PayoffSpec::PowerCall2 { strike } => vec![vec![strike.ln()]],
            PayoffSpec::DigitalCall { barrier }
            | PayoffSpec::DigitalPut { barrier }
            | PayoffSpec::AssetOrNothingCall { barrier } => vec![vec![barrier.ln()]],
            PayoffSpec::DoubleDigital { low, high } => vec![vec![low.ln(), high.ln()]],
            PayoffSpec::MinCall { strike, assets } | PayoffSpec::MaxPut { strike, assets } => {
                vec![vec![strike.ln()]; *assets]
            }
            PayoffSpec::Product(f) => f.iter().map(|p| p.log_levels().remove(0)).collect(),
        }
    }

    /// Same payoff with its strike (or barrier) replaced; used by strike grids.
    pub fn with_strike(&self, k: T) -> Self {
        match self {
            PayoffSpec::Call { .. } => PayoffSpec::Call { strike: k },
            PayoffSpec::Put { .. } => PayoffSpec::Put { strike: k },
            PayoffSpec::DigitalCall { .. } => PayoffSpec::DigitalCall { barrier: k },
            PayoffSpec::DigitalPut { .. } => PayoffSpec::DigitalPut { barrier: k },
            PayoffSpec::AssetOrNothingCall { .. } => PayoffSpec::AssetOrNothingCall { barrier: k },
            PayoffSpec::DoubleDigital { low, high } => {
                let ratio = *high / *low;
                PayoffSpec::DoubleDigital {
                    low: k,
                    high: k * ratio,
                }
            }
            PayoffSpec::SelfQuantoCall { .. } => PayoffSpec::SelfQuantoCall { strike: k },
            PayoffSpec::PowerCall2 { .. } => PayoffSpec::PowerCall2 { strike: k },
            PayoffSpec::MinCall { assets, .. } => PayoffSpec::MinCall {
                strike: k,
                assets: *assets,
            },
            PayoffSpec::MaxPut { assets, .. } => PayoffSpec::MaxPut {
                strike: k,
                assets: *assets,
            },
            PayoffSpec::Product(f) => {
                let mut f = f.clone();
                if let Some(first) = f.first_mut() {
                    *first = first.with_strike(k);
                }
                PayoffSpec::Product(f)
            }
        }
    }

    /// Default damping, comfortably inside the payoff strip.
    pub fn default_damping(&self) -> Vec<T> {
        let v = match self {
            PayoffSpec::Call { .. } => 1.75,
            PayoffSpec::Put { .. } => -1.0,
            PayoffSpec::DigitalCall { .. } => 0.5,
            PayoffSpec::DigitalPut { .. } => -0.5,
            PayoffSpec::AssetOrNothingCall { .. } => 1.5,
            PayoffSpec::DoubleDigital { .. } => 0.5,
            PayoffSpec::SelfQuantoCall { .. } | PayoffSpec::PowerCall2 { .. } => 2.5,
            PayoffSpec::MinCall { assets, .. } => {
                let d = *assets;
                return vec![lit(if d == 1 { 1.75 } else { 1.5 / d as f64 }); d];
            }
            PayoffSpec::MaxPut { assets, .. } => return vec![lit(-0.5); *assets],
            PayoffSpec::Product(f) => {
                return f.iter().map(|p| p.default_damping()[0]).collect();
            }
        };
        vec![lit(v)]
    }
}

fn sum_prod<T: Real>(z: &[Complex<T>]) -> (Complex<T>, Complex<T>) {
    let i = cplx(T::zero(), T::one());
    z.iter().fold((real(T::zero()), real(T::one())), |(s, p), zk| {
        (s + zk, p * (i * zk))
    })
}

/// Least-squares decay exponent `p` of `|f̂(u+iR)| ~ u^{-p}` over `u_grid`.
pub fn decay_estimate<T: Real>(spec: &PayoffSpec<T>, r: T, u_grid: &[T]) -> Result<T> {
    if spec.dimension() != 1 {
        return Err(Error::Parameter("decay estimate needs a single-asset payoff".into()));
    }
    if u_grid.len() < 2 {
        return Err(Error::Parameter("decay estimate needs at least two grid points".into()));
    }
    let pts: Vec<(T, T)> = u_grid
        .iter()
        .map(|&u| {
            let g = spec.fhat(&[cplx(u, r)]);
            (u.ln(), g.norm().ln())
        })
        .collect();
    let n = T::from_usize(pts.len()).unwrap();
    let mx = pts.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = pts.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let (sxy, sxx) = pts.iter().fold((T::zero(), T::zero()), |(a, b), p| {
        (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx) * (p.0 - mx))
    });
    Ok(-sxy / sxx)
}

/// Log-spaced grid on `[lo, hi]`.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    let last = T::from_usize(n.max(2) - 1).unwrap();
    (0..n.max(2))
        .map(|k| (a + (b - a) * T::from_usize(k).unwrap() / last).exp())
        .collect()
}
