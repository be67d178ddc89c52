//! Two-asset affine stochastic volatility model with one square-root
//! variance factor (Dempster–Hong), closed-form joint MGF.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::scalar::{lit, real, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhsvParams<T> {
    /// Volatility scales `(σ1, σ2, σ3)`; `σ3` is the vol-of-variance.
    pub sigma: [T; 3],
    pub rho12: T,
    pub rho13: T,
    pub rho23: T,
    pub v0: T,
    pub kappa: T,
    /// Long-run variance.
    pub mu_v: T,
    /// Initial log-prices.
    pub h0: [T; 2],
    /// Deterministic log drift per unit time added to both assets (`r − q`).
    pub carry: T,
}

impl<T: Real> DhsvParams<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sigma: [T; 3],
        rho12: T,
        rho13: T,
        rho23: T,
        v0: T,
        kappa: T,
        mu_v: T,
        h0: [T; 2],
    ) -> Result<Self> {
        if sigma.iter().any(|s| !(*s > T::zero())) {
            return Err(Error::Parameter("sigma1, sigma2, sigma3 must be positive".into()));
        }
        if !(v0 > T::zero() && kappa > T::zero() && mu_v > T::zero()) {
            return Err(Error::Parameter("v0, kappa and mu must be positive".into()));
        }
        for r in [rho12, rho13, rho23] {
            if !(r.abs() <= T::one()) {
                return Err(Error::Parameter("correlations must lie in [-1, 1]".into()));
            }
        }
        let p = Self {
            sigma,
            rho12,
            rho13,
            rho23,
            v0,
            kappa,
            mu_v,
            h0,
            carry: T::zero(),
        };
        if cholesky(&p.correlation_f64()).is_none() {
            return Err(Error::Parameter(
                "correlation matrix is not positive semidefinite".into(),
            ));
        }
        Ok(p)
    }

    pub fn correlation_f64(&self) -> Vec<Vec<f64>> {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        vec![
            vec![1.0, f(self.rho12), f(self.rho13)],
            vec![f(self.rho12), 1.0, f(self.rho23)],
            vec![f(self.rho13), f(self.rho23), 1.0],
        ]
    }

    fn aux(&self, u: &[Complex<T>; 2]) -> (Complex<T>, Complex<T>, Complex<T>) {
        let [s1, s2, s3] = self.sigma;
        let half: T = lit(0.5);
        let two: T = lit(2.0);
        let zeta = (u[0] * u[0] * (s1 * s1) + u[1] * u[1] * (s2 * s2)
            + u[0] * u[1] * (two * self.rho12 * s1 * s2)
            - u[0] * (s1 * s1)
            - u[1] * (s2 * s2))
            * half;
        let gamma = real(self.kappa) - u[0] * (self.rho13 * s1 * s3) - u[1] * (self.rho23 * s2 * s3);
        let theta = (gamma * gamma - zeta * (two * s3 * s3)).sqrt();
        (zeta, gamma, theta)
    }

    /// Exponent pieces `(A, L)` where the log-MGF of the log-return is
    /// `A·v0 − (2κμ/σ3²)·L` and `L = log(D/2θ) + (θ−γ)t/2`.
    ///
    /// `log(D/2θ)` is split as `log((θ+γ)/2θ) + log(1 − g e^{−θt})` with
    /// `g = (γ−θ)/(γ+θ)`, which keeps both logarithms on their principal
    /// branch along the pricing contour.
    fn pieces(&self, u: &[Complex<T>; 2], t: T) -> (Complex<T>, Complex<T>) {
        let (zeta, gamma, theta) = self.aux(u);
        let one = real(T::one());
        let two: T = lit(2.0);
        let small: T = lit(1e-10);
        if theta.norm() <= small * (T::one() + gamma.norm()) {
            // θ → 0 limit of both pieces.
            let denom = one * two + gamma * t;
            let a = zeta * (two * t) / denom;
            let l = (denom / two).ln() - gamma * (t * lit(0.5));
            return (a, l);
        }
        let e = (-theta * t).exp();
        let d = theta + gamma + (theta - gamma) * e;
        let a = zeta * (one - e) * two / d;
        let g = (gamma - theta) / (gamma + theta);
        let l = ((theta + gamma) / (theta * two)).ln() + (one - g * e).ln() + (theta - gamma) * (t * lit(0.5));
        (a, l)
    }

    /// Log-MGF of the log-return `H_t − H_0` (carry included).
    pub(crate) fn log_mgf_return(&self, u: &[Complex<T>; 2], t: T) -> Complex<T> {
        let (a, l) = self.pieces(u, t);
        let s3 = self.sigma[2];
        let c = lit::<T>(2.0) * self.kappa * self.mu_v / (s3 * s3);
        a * self.v0 - l * c + (u[0] + u[1]) * (self.carry * t)
    }

    /// Real-argument membership test: the MGF stays finite up to `t` iff
    /// `D(s)/2θ` stays positive for every `s ∈ (0, t]`.
    pub fn strip_contains(&self, r: &[T; 2], t: T) -> bool {
        let u = [real(r[0]), real(r[1])];
        let (_, gamma, theta) = self.aux(&u);
        let two: T = lit(2.0);
        let n = 256;
        for k in 1..=n {
            let s = t * T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
            let ratio = if theta.norm() <= lit::<T>(1e-10) * (T::one() + gamma.norm()) {
                real(T::one()) + gamma * (s / two)
            } else {
                let e = (-theta * s).exp();
                (theta + gamma + (theta - gamma) * e) / (theta * two)
            };
            if !(ratio.re > T::zero()) || !ratio.re.is_finite() {
                return false;
            }
        }
        self.log_mgf_return(&u, t).re.is_finite()
    }
}

/// Joint MGF of `H_t = (H¹_t, H²_t)` including the initial log-prices.
pub fn mgf_dhsv<T: Real>(p: &DhsvParams<T>, u: &[Complex<T>; 2], t: T) -> Result<Complex<T>> {
    let v = p.log_mgf_return(u, t) + u[0] * p.h0[0] + u[1] * p.h0[1];
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Numerical(format!(
            "Dempster-Hong exponent not finite at u = ({}, {})",
            u[0], u[1]
        )));
    }
    Ok(v.exp())
}

/// Branch-tracking evaluator for one integration path.
///
/// Evaluates `log(D/2θ) + (θ−γ)t/2` from the principal logarithm of the
/// unsplit ratio and unwinds `2πi` jumps relative to the previous node, so a
/// caller that walks the contour in order obtains the continuous branch.
/// Owned by one caller at a time.
#[derive(Debug, Clone)]
pub struct DhsvPath<T> {
    params: DhsvParams<T>,
    t: T,
    prev: Option<Complex<T>>,
}

impl<T: Real> DhsvPath<T> {
    pub fn new(params: DhsvParams<T>, t: T) -> Self {
        Self {
            params,
            t,
            prev: None,
        }
    }

    /// Next node on the path; `u` should move continuously from the previous call.
    pub fn eval(&mut self, u: &[Complex<T>; 2]) -> Result<Complex<T>> {
        let p = &self.params;
        let t = self.t;
        let (zeta, gamma, theta) = p.aux(u);
        let one = real(T::one());
        let two: T = lit(2.0);
        let e = (-theta * t).exp();
        let d = theta + gamma + (theta - gamma) * e;
        if d.norm() == T::zero() || theta.norm() == T::zero() {
            return Err(Error::Numerical("branch tracking hit a zero of D".into()));
        }
        let a = zeta * (one - e) * two / d;
        let mut l = (d / (theta * two)).ln() + (theta - gamma) * (t * lit(0.5));
        if let Some(prev) = self.prev {
            let two_pi = T::PI() * two;
            let k = ((prev.im - l.im) / two_pi).round();
            l.im += k * two_pi;
            if (l.im - prev.im).abs() > T::FRAC_PI_2() {
                return Err(Error::Numerical(
                    "branch discontinuity between adjacent nodes".into(),
                ));
            }
        }
        if !(l.re.is_finite() && a.re.is_finite()) {
            return Err(Error::Numerical("Dempster-Hong exponent exploded".into()));
        }
        self.prev = Some(l);
        let s3 = p.sigma[2];
        let c = two * p.kappa * p.mu_v / (s3 * s3);
        let v = a * p.v0 - l * c + (u[0] + u[1]) * (p.carry * t) + u[0] * p.h0[0] + u[1] * p.h0[1];
        Ok(v.exp())
    }
}
