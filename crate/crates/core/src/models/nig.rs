use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{det2, mat2_vec, quad_form2, sym_eigenvalues2, Mat2};
use crate::scalar::{lit, real, Real};

/// Univariate NIG parameters `(α, β, δ, μ)`, per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nig1dParams<T> {
    pub alpha: T,
    pub beta: T,
    pub delta: T,
    pub mu: T,
}

impl<T: Real> Nig1dParams<T> {
    pub fn new(alpha: T, beta: T, delta: T, mu: T) -> Result<Self> {
        if !(alpha > T::zero() && delta > T::zero()) {
            return Err(Error::Parameter("NIG requires alpha > 0 and delta > 0".into()));
        }
        if !(alpha * alpha > beta * beta) {
            return Err(Error::Parameter("NIG requires alpha^2 > beta^2".into()));
        }
        Ok(Self {
            alpha,
            beta,
            delta,
            mu,
        })
    }

    pub(crate) fn gamma(&self) -> T {
        (self.alpha * self.alpha - self.beta * self.beta).sqrt()
    }

    /// `log M(u)` for one unit of time, without the strip check.
    pub(crate) fn log_mgf_unit(&self, u: Complex<T>) -> Complex<T> {
        let b = u + self.beta;
        let inner = real(self.alpha * self.alpha) - b * b;
        u * self.mu + (real(self.gamma()) - inner.sqrt()) * self.delta
    }

    pub fn in_strip(&self, r: T) -> bool {
        let b = self.beta + r;
        self.alpha * self.alpha - b * b >= T::zero()
    }
}

/// Univariate NIG moment generating function `E[e^{u H_T}]`.
pub fn mgf_nig1d<T: Real>(p: &Nig1dParams<T>, u: Complex<T>, t: T) -> Result<Complex<T>> {
    if !p.in_strip(u.re) {
        return Err(Error::Domain(format!(
            "Re(u) = {} outside the NIG strip [{}, {}]",
            u.re,
            -p.alpha - p.beta,
            p.alpha - p.beta
        )));
    }
    Ok((p.log_mgf_unit(u) * t).exp())
}

/// Bivariate NIG parameters `(α, β, δ, μ, Δ)` with `det Δ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nig2dParams<T> {
    pub alpha: T,
    pub beta: [T; 2],
    pub delta: T,
    pub mu: [T; 2],
    pub delta_matrix: Mat2<T>,
}

impl<T: Real> Nig2dParams<T> {
    pub fn new(alpha: T, beta: [T; 2], delta: T, mu: [T; 2], delta_matrix: Mat2<T>) -> Result<Self> {
        if !(alpha > T::zero() && delta > T::zero()) {
            return Err(Error::Parameter("NIG requires alpha > 0 and delta > 0".into()));
        }
        let m = delta_matrix;
        if (m[0][1] - m[1][0]).abs() > lit(1e-12) {
            return Err(Error::Parameter("Delta must be symmetric".into()));
        }
        if !(m[0][0] > T::zero() && sym_eigenvalues2(&m)[0] > T::zero()) {
            return Err(Error::Parameter("Delta must be positive definite".into()));
        }
        let det_tol = lit::<T>(1e-12).max(T::epsilon() * lit(16.0));
        if (det2(&m) - T::one()).abs() > det_tol {
            return Err(Error::Parameter(format!(
                "det(Delta) must equal 1, got {}",
                det2(&m)
            )));
        }
        let p = Self {
            alpha,
            beta,
            delta,
            mu,
            delta_matrix,
        };
        if !(p.gamma_sq() > T::zero()) {
            return Err(Error::Parameter(
                "NIG requires alpha^2 > <beta, Delta beta>".into(),
            ));
        }
        Ok(p)
    }

    /// `α² − <β, Δβ>`.
    pub fn gamma_sq(&self) -> T {
        self.alpha * self.alpha - quad_form2(&self.delta_matrix, &self.beta)
    }

    /// `α² − <β+R, Δ(β+R)>`; the strip is where this is non-negative.
    pub fn strip_margin(&self, r: &[T; 2]) -> T {
        let b = [self.beta[0] + r[0], self.beta[1] + r[1]];
        self.alpha * self.alpha - quad_form2(&self.delta_matrix, &b)
    }

    pub fn in_strip(&self, r: &[T; 2]) -> bool {
        self.strip_margin(r) >= T::zero()
    }

    pub(crate) fn log_mgf_unit(&self, u: &[Complex<T>; 2]) -> Complex<T> {
        let m = &self.delta_matrix;
        let b = [u[0] + self.beta[0], u[1] + self.beta[1]];
        let db = [
            b[0] * m[0][0] + b[1] * m[0][1],
            b[0] * m[1][0] + b[1] * m[1][1],
        ];
        let q = b[0] * db[0] + b[1] * db[1];
        let inner = real(self.alpha * self.alpha) - q;
        u[0] * self.mu[0] + u[1] * self.mu[1] + (real(self.gamma_sq().sqrt()) - inner.sqrt()) * self.delta
    }

    /// Univariate marginal law of component `i` (Blæsild's marginal theorem).
    pub fn marginal(&self, i: usize) -> Nig1dParams<T> {
        let m = &self.delta_matrix;
        let dii = m[i][i];
        let db = mat2_vec(m, &self.beta);
        let beta = db[i] / dii;
        let alpha = (self.gamma_sq() / dii + beta * beta).sqrt();
        Nig1dParams {
            alpha,
            beta,
            delta: self.delta * dii.sqrt(),
            mu: self.mu[i],
        }
    }
}

/// Bivariate NIG moment generating function `M_H(u)^T` with the bilinear
/// product and principal complex square root.
pub fn mgf_nig2d<T: Real>(p: &Nig2dParams<T>, u: &[Complex<T>; 2], t: T) -> Result<Complex<T>> {
    let r = [u[0].re, u[1].re];
    if !p.in_strip(&r) {
        return Err(Error::Domain(format!(
            "Re(u) = ({}, {}) outside the NIG moment strip",
            r[0], r[1]
        )));
    }
    Ok((p.log_mgf_unit(u) * t).exp())
}

/// Covariance matrix of `H_1`:
/// `δ (α²−<β,Δβ>)^{-1/2} (Δ + (α²−<β,Δβ>)^{-1} Δββ'Δ)`.
pub fn nig_covariance<T: Real>(p: &Nig2dParams<T>) -> Result<Mat2<T>> {
    let g2 = p.gamma_sq();
    if !(g2 > T::zero()) {
        return Err(Error::Domain("alpha^2 <= <beta, Delta beta>".into()));
    }
    let db = mat2_vec(&p.delta_matrix, &p.beta);
    let scale = p.delta / g2.sqrt();
    let mut out = [[T::zero(); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = scale * (p.delta_matrix[i][j] + db[i] * db[j] / g2);
        }
    }
    Ok(out)
}

/// Upper bound for `|M_H(R+iu)|` (unit time) whenever `|u| = u_norm`:
/// `exp(<μ,R> + δ sqrt(α²−<β,Δβ>) − δ sqrt(λ_min) |u|)`.
pub fn nig2d_decay_bound<T: Real>(p: &Nig2dParams<T>, r: &[T; 2], u_norm: T) -> T {
    let lmin = sym_eigenvalues2(&p.delta_matrix)[0];
    (p.mu[0] * r[0] + p.mu[1] * r[1] + p.delta * p.gamma_sq().sqrt()
        - p.delta * lmin.sqrt() * u_norm)
        .exp()
}
