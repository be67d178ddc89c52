//! Driving processes: closed-form extended MGFs, martingale drift fixing,
//! moment strips and decay envelopes.

mod dhsv;
mod levy;
mod nig;
mod strip;

use num_complex::Complex;

pub use dhsv::{mgf_dhsv, DhsvParams, DhsvPath};
pub use levy::{cumulant_lk, Jump, LevyTriplet};
pub use nig::{mgf_nig1d, mgf_nig2d, nig2d_decay_bound, nig_covariance, Nig1dParams, Nig2dParams};
pub use strip::MomentStrip;

use crate::error::{Error, Result};
use crate::linalg::sym_eigenvalues2;
use crate::scalar::{lit, real, Real};

/// A driving process for the log-price vector.
///
/// Every variant describes the law of the log-return `X_T = H_T − H_0`;
/// spot levels enter the pricer separately.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec<T> {
    Brownian1d(LevyTriplet<T>),
    CompoundPoissonDrift1d(LevyTriplet<T>),
    Nig1d(Nig1dParams<T>),
    Nig2d(Nig2dParams<T>),
    Dhsv2d(DhsvParams<T>),
    GenericLevy(LevyTriplet<T>),
}

impl<T: Real> ModelSpec<T> {
    /// Brownian motion with drift `b` and variance rate `c = σ²`.
    pub fn brownian(drift: T, variance: T) -> Result<Self> {
        Ok(ModelSpec::Brownian1d(LevyTriplet::brownian(drift, variance)?))
    }

    /// Drift plus compound Poisson jumps given as `(size, intensity)` atoms.
    pub fn compound_poisson(drift: T, jumps: &[(T, T)]) -> Result<Self> {
        Ok(ModelSpec::CompoundPoissonDrift1d(LevyTriplet::compound_poisson(
            drift, jumps,
        )?))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSpec::Brownian1d(_) => "Brownian1d",
            ModelSpec::CompoundPoissonDrift1d(_) => "CompoundPoissonDrift1d",
            ModelSpec::Nig1d(_) => "NIG1d",
            ModelSpec::Nig2d(_) => "NIG2d",
            ModelSpec::Dhsv2d(_) => "DHSV2d",
            ModelSpec::GenericLevy(_) => "GenericLevy",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            ModelSpec::Brownian1d(_) | ModelSpec::CompoundPoissonDrift1d(_) | ModelSpec::Nig1d(_) => 1,
            ModelSpec::Nig2d(_) | ModelSpec::Dhsv2d(_) => 2,
            ModelSpec::GenericLevy(t) => t.dimension(),
        }
    }

    /// Whether `P_{X_T}` has no atoms for `T > 0`.
    pub fn is_atomless(&self) -> bool {
        match self {
            ModelSpec::Nig1d(_) | ModelSpec::Nig2d(_) | ModelSpec::Dhsv2d(_) => true,
            ModelSpec::Brownian1d(t)
            | ModelSpec::CompoundPoissonDrift1d(t)
            | ModelSpec::GenericLevy(t) => t.has_diffusion(),
        }
    }

    /// `log M_{X_T}(u)`.
    pub fn log_mgf(&self, u: &[Complex<T>], t: T) -> Result<Complex<T>> {
        if u.len() != self.dimension() {
            return Err(Error::Parameter(format!(
                "argument dimension {} does not match model dimension {}",
                u.len(),
                self.dimension()
            )));
        }
        match self {
            ModelSpec::Brownian1d(tr)
            | ModelSpec::CompoundPoissonDrift1d(tr)
            | ModelSpec::GenericLevy(tr) => Ok(cumulant_lk(tr, u)? * t),
            ModelSpec::Nig1d(p) => {
                if !p.in_strip(u[0].re) {
                    return Err(Error::Domain(format!("Re(u) = {} outside the NIG strip", u[0].re)));
                }
                Ok(p.log_mgf_unit(u[0]) * t)
            }
            ModelSpec::Nig2d(p) => {
                if !p.in_strip(&[u[0].re, u[1].re]) {
                    return Err(Error::Domain(format!(
                        "Re(u) = ({}, {}) outside the NIG moment strip",
                        u[0].re, u[1].re
                    )));
                }
                Ok(p.log_mgf_unit(&[u[0], u[1]]) * t)
            }
            ModelSpec::Dhsv2d(p) => {
                let v = p.log_mgf_return(&[u[0], u[1]], t);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::Numerical("Dempster-Hong exponent not finite".into()));
                }
                Ok(v)
            }
        }
    }

    /// Extended MGF `M_{X_T}(u) = E[e^{<u, X_T>}]`.
    pub fn mgf(&self, u: &[Complex<T>], t: T) -> Result<Complex<T>> {
        self.log_mgf(u, t).map(|v| v.exp())
    }

    pub fn moment_strip(&self, t: T) -> MomentStrip<T> {
        match self {
            ModelSpec::Brownian1d(tr)
            | ModelSpec::CompoundPoissonDrift1d(tr)
            | ModelSpec::GenericLevy(tr) => MomentStrip::Everything {
                dimension: tr.dimension(),
            },
            ModelSpec::Nig1d(p) => MomentStrip::nig1d(p),
            ModelSpec::Nig2d(p) => MomentStrip::Ellipse(*p),
            ModelSpec::Dhsv2d(p) => MomentStrip::Numerical {
                params: *p,
                maturity: t,
            },
        }
    }

    /// Adjusts the drift so that `E[e^{H^i_T}] = e^{(r−q)T}` for every component.
    pub fn fix_drift(&self, rate: T, dividend: T) -> Result<Self> {
        let carry = rate - dividend;
        match self {
            ModelSpec::Brownian1d(tr) => Ok(ModelSpec::Brownian1d(fix_levy(tr, carry))),
            ModelSpec::CompoundPoissonDrift1d(tr) => {
                Ok(ModelSpec::CompoundPoissonDrift1d(fix_levy(tr, carry)))
            }
            ModelSpec::GenericLevy(tr) => Ok(ModelSpec::GenericLevy(fix_levy(tr, carry))),
            ModelSpec::Nig1d(p) => {
                let b1 = p.beta + T::one();
                if p.alpha * p.alpha < b1 * b1 {
                    return Err(Error::Infeasible(format!(
                        "E[exp(H)] is infinite: alpha^2 = {} < (beta+1)^2 = {}",
                        p.alpha * p.alpha,
                        b1 * b1
                    )));
                }
                let mut q = *p;
                q.mu = carry - p.delta * (p.gamma() - (p.alpha * p.alpha - b1 * b1).sqrt());
                Ok(ModelSpec::Nig1d(q))
            }
            ModelSpec::Nig2d(p) => {
                let mut q = *p;
                for i in 0..2 {
                    let mut e = [T::zero(); 2];
                    e[i] = T::one();
                    if !p.in_strip(&e) {
                        return Err(Error::Infeasible(format!(
                            "E[exp(H^{})] is infinite for the given NIG parameters",
                            i + 1
                        )));
                    }
                    let m = p.marginal(i);
                    let b1 = m.beta + T::one();
                    q.mu[i] = carry - m.delta * (m.gamma() - (m.alpha * m.alpha - b1 * b1).sqrt());
                }
                Ok(ModelSpec::Nig2d(q))
            }
            ModelSpec::Dhsv2d(p) => {
                let mut q = *p;
                q.carry = carry;
                Ok(ModelSpec::Dhsv2d(q))
            }
        }
    }

    /// Upper bound for `|M_{X_T}(R+iu)|` as a function of `|u|`, when one is known.
    pub fn envelope(&self, r: &[T], u_norm: T, t: T) -> Option<T> {
        let half: T = lit(0.5);
        match self {
            ModelSpec::Brownian1d(tr)
            | ModelSpec::CompoundPoissonDrift1d(tr)
            | ModelSpec::GenericLevy(tr) => {
                let k = levy::cumulant_real(tr, r);
                Some((t * (k - half * tr.min_diffusion_eigenvalue() * u_norm * u_norm)).exp())
            }
            ModelSpec::Nig1d(p) => {
                let b = p.beta + r[0];
                let inner = p.alpha * p.alpha - b * b;
                if inner < T::zero() {
                    return None;
                }
                Some((t * (p.mu * r[0] + p.delta * p.gamma() - p.delta * u_norm)).exp())
            }
            ModelSpec::Nig2d(p) => {
                Some(nig2d_decay_bound(p, &[r[0], r[1]], u_norm).powf(t))
            }
            ModelSpec::Dhsv2d(_) => None,
        }
    }

    /// Rough angular frequency of `u ↦ M(R+iu)` per unit `u`, used to size panels.
    pub fn frequency_hint(&self, r: &[T], t: T) -> T {
        match self {
            ModelSpec::Brownian1d(tr)
            | ModelSpec::CompoundPoissonDrift1d(tr)
            | ModelSpec::GenericLevy(tr) => {
                let d = tr.dimension();
                let mut w = T::zero();
                for i in 0..d {
                    let mut b = tr.drift[i];
                    for j in &tr.jumps {
                        b -= j.intensity * j.size[i];
                    }
                    let cr = (0..d).fold(T::zero(), |acc, k| acc + tr.diffusion[i][k] * r[k]);
                    w = w.max(b.abs() + cr.abs());
                }
                for j in &tr.jumps {
                    let rx = j
                        .size
                        .iter()
                        .zip(r)
                        .fold(T::zero(), |acc, (x, rr)| acc + *x * *rr);
                    let norm = j.size.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
                    w += j.intensity * rx.exp() * norm;
                }
                w * t
            }
            ModelSpec::Nig1d(p) => (p.mu.abs() + p.delta) * t,
            ModelSpec::Nig2d(p) => {
                let lmax = sym_eigenvalues2(&p.delta_matrix)[1];
                (p.mu[0].abs().max(p.mu[1].abs()) + p.delta * lmax.sqrt()) * t
            }
            ModelSpec::Dhsv2d(p) => {
                let s = p.sigma[0].max(p.sigma[1]);
                let rmax = r.iter().fold(T::zero(), |a, x| a.max(x.abs()));
                let half: T = lit(0.5);
                (p.carry.abs() + (half + rmax) * s * s * p.v0.max(p.mu_v)) * t
            }
        }
    }
}

fn fix_levy<T: Real>(tr: &LevyTriplet<T>, carry: T) -> LevyTriplet<T> {
    // κ(e_i) is affine in b_i: b_i = carry − ½c_ii − Σ λ (e^{x_i} − 1 − x_i).
    let half: T = lit(0.5);
    let mut out = tr.clone();
    for i in 0..tr.dimension() {
        let mut b = carry - half * tr.diffusion[i][i];
        for j in &tr.jumps {
            let x = j.size[i];
            b -= j.intensity * (x.exp() - T::one() - x);
        }
        out.drift[i] = b;
    }
    out
}

/// Convenience: `M(u)` at a real point.
pub fn mgf_real<T: Real>(model: &ModelSpec<T>, r: &[T], t: T) -> Result<T> {
    let u: Vec<Complex<T>> = r.iter().map(|&x| real(x)).collect();
    model.mgf(&u, t).map(|c| c.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    pub(crate) fn nig2d_paper(delta_matrix: [[f64; 2]; 2]) -> ModelSpec<f64> {
        ModelSpec::Nig2d(
            Nig2dParams::new(6.20, [-3.80, -2.50], 0.150, [0.0, 0.0], delta_matrix).unwrap(),
        )
        .fix_drift(0.0, 0.0)
        .unwrap()
    }

    fn zoo() -> Vec<ModelSpec<f64>> {
        vec![
            ModelSpec::brownian(0.0, 0.04).unwrap().fix_drift(0.0, 0.0).unwrap(),
            ModelSpec::compound_poisson(0.0, &[(0.1, 2.0), (-0.05, 1.0)])
                .unwrap()
                .fix_drift(0.03, 0.01)
                .unwrap(),
            ModelSpec::Nig1d(Nig1dParams::new(6.2, -3.8, 0.15, 0.0).unwrap())
                .fix_drift(0.0, 0.0)
                .unwrap(),
            nig2d_paper([[1.0, 0.0], [0.0, 1.0]]),
            nig2d_paper([[1.0, -1.0], [-1.0, 2.0]]),
            ModelSpec::Dhsv2d(
                DhsvParams::new([0.5, 1.0, 0.05], 0.5, 0.25, -0.5, 0.04, 1.0, 0.04, [0.0, 0.0])
                    .unwrap(),
            ),
        ]
    }

    #[test]
    fn mgf_is_one_at_zero() {
        for m in zoo() {
            let u = vec![c(0.0, 0.0); m.dimension()];
            for t in [0.1, 1.0, 2.5] {
                let v = m.mgf(&u, t).unwrap();
                assert!((v - c(1.0, 0.0)).norm() < 1e-12, "{}: {v}", m.kind_name());
            }
        }
    }

    #[test]
    fn martingale_after_fix_drift() {
        for m in zoo() {
            let m = m.fix_drift(0.0, 0.0).unwrap();
            for i in 0..m.dimension() {
                let mut u = vec![c(0.0, 0.0); m.dimension()];
                u[i] = c(1.0, 0.0);
                let v = m.mgf(&u, 0.75).unwrap();
                assert!((v - c(1.0, 0.0)).norm() < 1e-10, "{} comp {i}: {v}", m.kind_name());
            }
        }
    }

    #[test]
    fn fix_drift_with_carry() {
        for m in zoo() {
            let m = m.fix_drift(0.05, 0.02).unwrap();
            let t = 1.5;
            for i in 0..m.dimension() {
                let mut u = vec![c(0.0, 0.0); m.dimension()];
                u[i] = c(1.0, 0.0);
                let v = m.mgf(&u, t).unwrap();
                assert!((v.re - (0.03f64 * t).exp()).abs() < 1e-10, "{}", m.kind_name());
            }
        }
    }

    #[test]
    fn brownian_fixed_drift() {
        match ModelSpec::<f64>::brownian(0.3, 0.04).unwrap().fix_drift(0.0, 0.0).unwrap() {
            ModelSpec::Brownian1d(t) => assert!((t.drift[0] + 0.02).abs() < 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn compound_poisson_fixed_drift() {
        let m = ModelSpec::compound_poisson(0.0, &[(0.1, 2.0)]).unwrap().fix_drift(0.0, 0.0).unwrap();
        let ModelSpec::CompoundPoissonDrift1d(t) = m else { unreachable!() };
        // Compensated drift, and the path drift b − λx = −λ(e^x − 1).
        assert!((t.drift[0] + 2.0 * (0.1f64.exp() - 1.0 - 0.1)).abs() < 1e-15);
        assert!((t.drift[0] - 0.2 + 2.0 * (0.1f64.exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn nig2d_fix_drift_closes_both_components() {
        let m = nig2d_paper([[1.0, -1.0], [-1.0, 2.0]]);
        for i in 0..2 {
            let mut u = [c(0.0, 0.0); 2];
            u[i] = c(1.0, 0.0);
            assert!((m.mgf(&u, 1.0).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn fix_drift_infeasible_without_exponential_moment() {
        let m = ModelSpec::Nig1d(Nig1dParams::new(1.0, 0.5, 0.2, 0.0).unwrap());
        assert!(matches!(m.fix_drift(0.0, 0.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn hermitian_symmetry() {
        for m in zoo() {
            let d = m.dimension();
            let strip_pt = vec![0.3; d];
            for k in 0..20 {
                let uu: Vec<f64> = (0..d).map(|j| (k as f64 * 1.37 + j as f64 * 0.71).sin() * 15.0).collect();
                let plus: Vec<_> = strip_pt.iter().zip(&uu).map(|(&r, &u)| c(r, u)).collect();
                let minus: Vec<_> = strip_pt.iter().zip(&uu).map(|(&r, &u)| c(r, -u)).collect();
                let a = m.mgf(&plus, 0.8).unwrap();
                let b = m.mgf(&minus, 0.8).unwrap();
                assert!((a - b.conj()).norm() <= 1e-13 * (1.0 + a.norm()), "{}", m.kind_name());
            }
        }
    }

    #[test]
    fn generic_levy_equals_brownian_path() {
        let b = ModelSpec::brownian(-0.02, 0.04).unwrap();
        let g = ModelSpec::GenericLevy(LevyTriplet::brownian(-0.02, 0.04).unwrap());
        for k in 0..50 {
            let u = [c(1.5, k as f64 * 0.7 - 10.0)];
            assert_eq!(b.mgf(&u, 0.6).unwrap(), g.mgf(&u, 0.6).unwrap());
        }
    }

    #[test]
    fn nig2d_marginal_matches_univariate() {
        let ModelSpec::Nig2d(p) = nig2d_paper([[1.0, -1.0], [-1.0, 2.0]]) else { unreachable!() };
        for i in 0..2 {
            let m = p.marginal(i);
            for k in 0..30 {
                let z = c(0.2 + 0.02 * k as f64, -6.0 + 0.5 * k as f64);
                let mut u = [c(0.0, 0.0); 2];
                u[i] = z;
                let joint = mgf_nig2d(&p, &u, 0.5).unwrap();
                let uni = mgf_nig1d(&m, z, 0.5).unwrap();
                assert!((joint - uni).norm() < 1e-10 * joint.norm().max(1.0));
            }
        }
    }

    #[test]
    fn nig2d_envelope_dominates() {
        let m = nig2d_paper([[1.0, -1.0], [-1.0, 2.0]]);
        let r = [1.0, 1.0];
        for k in 0..100 {
            let ang = k as f64 * std::f64::consts::TAU / 100.0 + 0.013;
            let u = [c(1.0, 50.0 * ang.cos()), c(1.0, 50.0 * ang.sin())];
            let v = m.mgf(&u, 1.0).unwrap().norm();
            assert!(v <= m.envelope(&r, 50.0, 1.0).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn strips() {
        let b = ModelSpec::brownian(0.0, 0.04).unwrap();
        assert!(b.moment_strip(1.0).contains(&[10.0]));
        let n = nig2d_paper([[1.0, 0.0], [0.0, 1.0]]);
        let s = n.moment_strip(1.0);
        assert!(s.contains(&[1.0, 1.0]));
        assert!(!s.contains(&[10.0, 10.0]));
        assert!(s.contains(&[0.0, 0.0]));
    }

    #[test]
    fn atomless_flags() {
        assert!(ModelSpec::brownian(0.0, 0.04).unwrap().is_atomless());
        assert!(!ModelSpec::compound_poisson(0.0, &[(0.1, 2.0)]).unwrap().is_atomless());
        assert!(nig2d_paper([[1.0, 0.0], [0.0, 1.0]]).is_atomless());
    }

    #[test]
    fn works_in_single_precision() {
        let m = ModelSpec::<f32>::brownian(0.0, 0.04).unwrap().fix_drift(0.0, 0.0).unwrap();
        let v = m.mgf(&[Complex::new(1.0f32, 0.0)], 1.0).unwrap();
        assert!((v.re - 1.0).abs() < 1e-6);
    }
}
