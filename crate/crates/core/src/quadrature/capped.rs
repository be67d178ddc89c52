//! Symmetric capped integrals `∫_{−A}^{A}` on a doubling cap schedule.

use num_complex::Complex;

use super::gk::Tol;
use super::line::{interval, Outcome};
use super::{CapResult, CapWindow, QuadConfig};
use crate::scalar::{lit, Real};

/// Smooth step: 1 on `[0, 1]`, 0 beyond 2, C^∞ in between.
pub(crate) fn taper<T: Real>(t: T) -> T {
    let one = T::one();
    let two = one + one;
    if t <= one {
        return one;
    }
    if t >= two {
        return T::zero();
    }
    let psi = |x: T| if x > T::zero() { (-one / x).exp() } else { T::zero() };
    let a = psi(two - t);
    let b = psi(t - one);
    a / (a + b)
}

/// Max pairwise distance of the last three levels and the agreement verdict.
pub fn detect_convergence<T: Real>(levels: &[Complex<T>], abs_tol: T, rel_tol: T) -> (bool, T) {
    if levels.len() < 3 {
        let amp = if levels.len() == 2 {
            (levels[1] - levels[0]).norm()
        } else {
            T::infinity()
        };
        return (false, amp);
    }
    let w = &levels[levels.len() - 3..];
    let amp = (w[0] - w[1]).norm().max((w[0] - w[2]).norm()).max((w[1] - w[2]).norm());
    let last = w[2].norm();
    (amp <= abs_tol + rel_tol * last, amp)
}

/// Capped half-line integration of a vector `g`; `finish` maps raw
/// half-line values to the reported ones (e.g. doubling the real part).
pub(crate) fn capped_half_line<T, F>(
    g: &mut F,
    m: usize,
    breakpoints: &[T],
    max_width: Option<T>,
    cfg: &QuadConfig<T>,
    finish: &dyn Fn(Complex<T>) -> Complex<T>,
) -> (Vec<CapResult<T>>, usize)
where
    T: Real,
    F: FnMut(T, &mut [Complex<T>]) + ?Sized,
{
    let zero = Complex::new(T::zero(), T::zero());
    let eighth: T = lit(0.125);
    let mut nodes = 0usize;
    let mut levels: Vec<Vec<Complex<T>>> = vec![Vec::new(); m];
    let mut caps = Vec::new();
    let mut all_ok = true;
    let est_nodes = |a: T, b: T| -> usize {
        let panels = match max_width {
            Some(w) => ((b - a) / w).ceil().to_usize().unwrap_or(usize::MAX),
            None => 1,
        };
        panels.saturating_mul(super::gk::GK_NODES)
    };
    let tol_for = |vals: &[Complex<T>]| -> Tol<T> {
        let big = vals.iter().fold(T::zero(), |a, v| a.max(v.norm()));
        Tol {
            abs: (cfg.abs_tol * eighth).max(cfg.rel_tol * eighth * big),
            rel: T::zero(),
        }
    };

    let a0 = cfg.cap_initial;
    let mut partial: Vec<Complex<T>> = vec![zero; m];
    // ∫_0^{A0}
    let o = interval(g, m, T::zero(), a0, breakpoints, max_width, tol_for(&partial), cfg.max_nodes);
    nodes += o.nodes;
    all_ok &= o.converged;
    partial.copy_from_slice(&o.values);

    for k in 0..=cfg.cap_max_doublings {
        let ak = a0 * T::from_usize(1usize << k.min(60)).unwrap();
        let value: Vec<Complex<T>> = match cfg.cap_window {
            CapWindow::Raw => {
                if k > 0 {
                    let prev = ak * lit::<T>(0.5);
                    if nodes.saturating_add(est_nodes(prev, ak)) > cfg.max_nodes {
                        break;
                    }
                    let o: Outcome<T> =
                        interval(g, m, prev, ak, breakpoints, max_width, tol_for(&partial), cfg.max_nodes);
                    nodes += o.nodes;
                    all_ok &= o.converged;
                    for (p, v) in partial.iter_mut().zip(&o.values) {
                        *p += *v;
                    }
                }
                partial.clone()
            }
            CapWindow::Taper => {
                let hi = ak + ak;
                if nodes.saturating_add(est_nodes(ak, hi)) > cfg.max_nodes {
                    break;
                }
                let mut h = |u: T, out: &mut [Complex<T>]| {
                    let (plain, weighted) = out.split_at_mut(m);
                    g(u, plain);
                    let w = taper(u / ak);
                    for (dst, src) in weighted.iter_mut().zip(plain.iter()) {
                        *dst = *src * w;
                    }
                };
                let o = interval(&mut h, 2 * m, ak, hi, breakpoints, max_width, tol_for(&partial), cfg.max_nodes);
                nodes += o.nodes;
                all_ok &= o.converged;
                let v: Vec<Complex<T>> = (0..m).map(|i| partial[i] + o.values[m + i]).collect();
                for i in 0..m {
                    partial[i] += o.values[i];
                }
                v
            }
        };
        caps.push(ak);
        for i in 0..m {
            levels[i].push(finish(value[i]));
        }
        let done = (0..m).all(|i| detect_convergence(&levels[i], cfg.abs_tol, cfg.rel_tol).0);
        if done {
            break;
        }
    }
    let cap_used = caps.last().copied().unwrap_or(T::zero());
    let results = levels
        .into_iter()
        .map(|lv| {
            let (conv, amp) = detect_convergence(&lv, cfg.abs_tol, cfg.rel_tol);
            CapResult {
                value: lv.last().copied().unwrap_or(zero),
                cap_used,
                converged: conv && all_ok,
                oscillation_amplitude: amp,
                levels: lv,
                nodes,
            }
        })
        .collect();
    (results, nodes)
}
