use std::fmt;

use crate::models::dhsv::DhsvParams;
use crate::models::nig::{Nig1dParams, Nig2dParams};
use crate::scalar::Real;

/// The set `{R : M_{X_T}(R) < ∞}` of admissible exponential tilts.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentStrip<T> {
    /// Every real vector (Gaussian and finite-activity jump models).
    Everything { dimension: usize },
    /// Closed interval `[lo, hi]` (univariate NIG).
    Interval { lo: T, hi: T },
    /// `{R : α² − <β+R, Δ(β+R)> ≥ 0}`, an ellipse centred at `−β`.
    Ellipse(Nig2dParams<T>),
    /// No closed form; membership is checked by evaluating the MGF.
    Numerical { params: DhsvParams<T>, maturity: T },
}

impl<T: Real> MomentStrip<T> {
    pub fn dimension(&self) -> usize {
        match self {
            MomentStrip::Everything { dimension } => *dimension,
            MomentStrip::Interval { .. } => 1,
            MomentStrip::Ellipse(_) | MomentStrip::Numerical { .. } => 2,
        }
    }

    pub fn contains(&self, r: &[T]) -> bool {
        if r.len() != self.dimension() {
            return false;
        }
        match self {
            MomentStrip::Everything { .. } => r.iter().all(|x| x.is_finite()),
            MomentStrip::Interval { lo, hi } => r[0] >= *lo && r[0] <= *hi,
            MomentStrip::Ellipse(p) => p.in_strip(&[r[0], r[1]]),
            MomentStrip::Numerical { params, maturity } => {
                params.strip_contains(&[r[0], r[1]], *maturity)
            }
        }
    }

    /// Strict interior test used when choosing a damping vector.
    pub fn contains_interior(&self, r: &[T]) -> bool {
        if !self.contains(r) {
            return false;
        }
        match self {
            MomentStrip::Interval { lo, hi } => r[0] > *lo && r[0] < *hi,
            MomentStrip::Ellipse(p) => p.strip_margin(&[r[0], r[1]]) > T::zero(),
            _ => true,
        }
    }

    /// A point well inside the strip, used as a retreat target.
    pub fn center(&self) -> Option<Vec<T>> {
        match self {
            MomentStrip::Everything { .. } | MomentStrip::Numerical { .. } => None,
            MomentStrip::Interval { lo, hi } => {
                Some(vec![(*lo + *hi) / (T::one() + T::one())])
            }
            MomentStrip::Ellipse(p) => Some(vec![-p.beta[0], -p.beta[1]]),
        }
    }

    pub(crate) fn nig1d(p: &Nig1dParams<T>) -> Self {
        MomentStrip::Interval {
            lo: -p.alpha - p.beta,
            hi: p.alpha - p.beta,
        }
    }
}

impl<T: Real> fmt::Display for MomentStrip<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentStrip::Everything { dimension } => write!(f, "all of R^{dimension}"),
            MomentStrip::Interval { lo, hi } => write!(f, "[{lo}, {hi}]"),
            MomentStrip::Ellipse(p) => write!(
                f,
                "{{R : {}^2 - <beta+R, Delta(beta+R)> >= 0}} with beta = ({}, {})",
                p.alpha, p.beta[0], p.beta[1]
            ),
            MomentStrip::Numerical { maturity, .. } => {
                write!(f, "numerically checked Dempster-Hong strip at T = {maturity}")
            }
        }
    }
}
