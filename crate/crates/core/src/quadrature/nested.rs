//! Iterated integration over `ℝ^d` and over cubes, one axis at a time.

use num_complex::Complex;

use super::gk::Tol;
use super::line::{half_line, interval, HalfLine, Outcome};
use super::{osc_width, QuadConfig};
use crate::scalar::{lit, Real};

pub(crate) type PointFn<'a, T> = dyn FnMut(&[T], &mut [Complex<T>]) + 'a;

/// Ridges are hyperplanes `<c, u> = 0` along which the integrand has kinks
/// or near-singular behaviour; each yields a breakpoint on the last axis
/// where `c` is nonzero.
pub(crate) fn axis_breakpoints<T: Real>(ridges: &[Vec<T>], point: &[T]) -> Vec<T> {
    let axis = point.len();
    let mut out = Vec::new();
    for c in ridges {
        let last = c.iter().rposition(|x| !x.is_zero());
        if last != Some(axis) {
            continue;
        }
        let s = c[..axis]
            .iter()
            .zip(point)
            .fold(T::zero(), |a, (ci, ui)| a + *ci * *ui);
        out.push(-s / c[axis]);
    }
    out
}

pub(crate) struct Stats {
    pub leaves: usize,
    pub converged: bool,
}

fn inner_tol<T: Real>(tol: Tol<T>, u: T) -> Tol<T> {
    // Inner errors are integrated against the outer variable; the weight
    // 1/(1+|u|) keeps their sum below tol/8 for extents up to ~1e6.
    let c: T = lit(112.0);
    Tol {
        abs: tol.abs / (c * (T::one() + u.abs())),
        rel: tol.rel * lit::<T>(0.125),
    }
}

/// `∫_{ℝ^d} f`; with `hermitian` only `u_1 ≥ 0` is integrated and the
/// caller doubles the real part.
#[allow(clippy::too_many_arguments)]
pub(crate) fn nested_line<T: Real>(
    f: &mut PointFn<'_, T>,
    d: usize,
    m: usize,
    hermitian: bool,
    omega: Option<T>,
    ridges: &[Vec<T>],
    tol: Tol<T>,
    cfg: &QuadConfig<T>,
    point: &mut Vec<T>,
    stats: &mut Stats,
) -> Outcome<T> {
    let axis = point.len();
    let bps: Vec<T> = axis_breakpoints(ridges, point).into_iter().map(|x| x.abs()).collect();
    let fold = hermitian && axis == 0;
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); m];
    let eval = |u: T, out: &mut [Complex<T>], point: &mut Vec<T>, stats: &mut Stats, f: &mut PointFn<'_, T>| {
        point.push(u);
        if axis + 1 == d {
            f(point, out);
            stats.leaves += 1;
        } else {
            let o = nested_line(f, d, m, hermitian, omega, ridges, inner_tol(tol, u), cfg, point, stats);
            stats.converged &= o.converged;
            out.copy_from_slice(&o.values);
        }
        point.pop();
    };
    let mut g = |v: T, out: &mut [Complex<T>]| {
        eval(v, out, point, stats, f);
        if !fold {
            eval(-v, &mut scratch, point, stats, f);
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += *s;
            }
        }
    };
    let spec = HalfLine {
        breakpoints: &bps,
        max_width: omega.map(osc_width),
        envelope: None,
        initial: cfg.initial_truncation.unwrap_or(cfg.cap_initial),
    };
    half_line(&mut g, m, &spec, tol, cfg.max_nodes)
}

/// `∫_{[−L, L]^d} f · Π w(u_j)` by iterated adaptive integration; with
/// `fold` the first axis runs over `[0, L]` only.
#[allow(clippy::too_many_arguments)]
pub(crate) fn nested_box<T: Real>(
    f: &mut PointFn<'_, T>,
    d: usize,
    m: usize,
    half_width: T,
    fold: bool,
    weight: &dyn Fn(T) -> T,
    breakpoints: &[T],
    max_width: Option<T>,
    tol: Tol<T>,
    cfg: &QuadConfig<T>,
    point: &mut Vec<T>,
    stats: &mut Stats,
) -> Outcome<T> {
    let axis = point.len();
    let mut g = |u: T, out: &mut [Complex<T>]| {
        point.push(u);
        let w = weight(u);
        if axis + 1 == d {
            f(point, out);
            stats.leaves += 1;
        } else {
            // Both half-axes carry inner error, hence half the line tolerance.
            let mut inner = inner_tol(tol, u);
            inner.abs *= lit::<T>(0.5);
            let o = nested_box(f, d, m, half_width, false, weight, breakpoints, max_width, inner, cfg, point, stats);
            stats.converged &= o.converged;
            out.copy_from_slice(&o.values);
        }
        for v in out.iter_mut() {
            *v *= w;
        }
        point.pop();
    };
    let lo = if fold && axis == 0 { T::zero() } else { -half_width };
    interval(&mut g, m, lo, half_width, breakpoints, max_width, tol, cfg.max_nodes)
}
