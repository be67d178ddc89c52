use std::cell::RefCell;

use num_complex::Complex;

use crate::error::Error;
use crate::models::ModelSpec;
use crate::payoffs::PayoffSpec;
use crate::scalar::{cplx, Real};

/// Extra factor multiplying the price integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Weight {
    Price,
    /// `(R+iu)/S₀`
    Delta,
    /// `(R+iu)(R−1+iu)/S₀²`
    Gamma,
}

/// `h_k(u) = c · e^{<R+iu, log S₀>} · M(R+iu) · f̂_k(iR−u) · w(u)` for a list of
/// payoffs sharing model, spot, maturity and damping.
pub(crate) struct Integrand<'a, T> {
    pub model: &'a ModelSpec<T>,
    pub payoffs: &'a [PayoffSpec<T>],
    pub log_spot: Vec<T>,
    pub damping: &'a [T],
    pub maturity: T,
    pub scale: T,
    pub weight: Weight,
    /// Evaluate `M` once per node for all payoffs; otherwise once per payoff.
    pub cache: bool,
    pub failure: RefCell<Option<Error>>,
}

impl<T: Real> Integrand<'_, T> {
    fn mgf(&self, w: &[Complex<T>]) -> Complex<T> {
        match self.model.mgf(w, self.maturity) {
            Ok(v) if v.re.is_finite() && v.im.is_finite() => v,
            Ok(_) => {
                self.fail(Error::Numerical("characteristic function is not finite".into()));
                Complex::new(T::zero(), T::zero())
            }
            Err(e) => {
                self.fail(e);
                Complex::new(T::zero(), T::zero())
            }
        }
    }

    fn fail(&self, e: Error) {
        let mut slot = self.failure.borrow_mut();
        if slot.is_none() {
            *slot = Some(e);
        }
    }

    pub fn take_failure(&self) -> Option<Error> {
        self.failure.borrow_mut().take()
    }

    pub fn eval(&self, u: &[T], out: &mut [Complex<T>]) {
        let d = u.len();
        let mut w = [Complex::new(T::zero(), T::zero()); 3];
        let mut z = [Complex::new(T::zero(), T::zero()); 3];
        let mut phase = Complex::new(T::zero(), T::zero());
        for j in 0..d {
            w[j] = cplx(self.damping[j], u[j]);
            z[j] = cplx(-u[j], self.damping[j]);
            phase += w[j] * self.log_spot[j];
        }
        let w = &w[..d];
        let z = &z[..d];
        let mut common = phase.exp() * self.scale;
        match self.weight {
            Weight::Price => {}
            Weight::Delta => common = common * w[0] * (-self.log_spot[0]).exp(),
            Weight::Gamma => {
                let s = (-self.log_spot[0]).exp();
                common = common * w[0] * (w[0] - T::one()) * s * s;
            }
        }
        if self.cache {
            let m = self.mgf(w) * common;
            for (o, p) in out.iter_mut().zip(self.payoffs) {
                *o = m * p.fhat(z);
            }
        } else {
            for (o, p) in out.iter_mut().zip(self.payoffs) {
                *o = self.mgf(w) * common * p.fhat(z);
            }
        }
    }
}
