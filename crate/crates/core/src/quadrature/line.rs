//! Improper integrals over `[0, ∞)` with tail control.

use num_complex::Complex;

use super::gk::{Adaptive, Tol};
use crate::scalar::{lit, Real};

pub(crate) struct HalfLine<'a, T> {
    pub breakpoints: &'a [T],
    pub max_width: Option<T>,
    /// `|g_k(u)| ≤ E(x)` for every component and every `u ≥ x`.
    pub envelope: Option<&'a dyn Fn(T) -> T>,
    pub initial: T,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome<T> {
    pub values: Vec<Complex<T>>,
    pub error: Vec<T>,
    pub nodes: usize,
    pub converged: bool,
}

/// Upper bound of `∫_b^∞ E` for nonincreasing `E`, by left sums on doubling cells.
pub(crate) fn envelope_tail<T: Real>(env: &dyn Fn(T) -> T, b: T) -> T {
    let mut s = T::zero();
    let mut x = b;
    let small: T = lit(1e-3);
    for j in 0..256 {
        let e = env(x);
        if !e.is_finite() {
            return T::infinity();
        }
        let term = e * x;
        s += term;
        if term <= small * s && j >= 3 {
            return s * lit::<T>(1.01);
        }
        x = x + x;
    }
    T::infinity()
}

/// Power-law tail estimate from panel peaks at `b0 < b1`.
fn power_tail<T: Real>(m0: T, b0: T, m1: T, b1: T) -> T {
    if m1 <= T::zero() {
        return T::zero();
    }
    if m0 <= m1 || b1 <= b0 {
        return T::infinity();
    }
    let p = (m0 / m1).ln() / (b1 / b0).ln();
    if p <= lit(1.05) {
        return T::infinity();
    }
    lit::<T>(2.0) * m1 * b1 / (p - T::one())
}

/// Splits `[a, b]` at interior breakpoints into panels no wider than `max_width`.
pub(crate) fn seed_panels<T: Real>(a: T, b: T, breakpoints: &[T], max_width: Option<T>) -> Vec<(T, T)> {
    let mut pts = vec![a];
    let mut bp: Vec<T> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    bp.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.extend(bp);
    pts.push(b);
    pts.dedup();
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let len = w[1] - w[0];
        if len <= T::zero() {
            continue;
        }
        let n = match max_width {
            Some(mw) if mw > T::zero() => (len / mw).ceil().to_usize().unwrap_or(1).max(1),
            _ => 1,
        };
        let step = len / T::from_usize(n).unwrap();
        for i in 0..n {
            let lo = w[0] + step * T::from_usize(i).unwrap();
            let hi = if i + 1 == n { w[1] } else { lo + step };
            out.push((lo, hi));
        }
    }
    out
}

/// `∫_0^∞ g` for a vector-valued `g`.
///
/// The body `[0, U₀]` is seeded at the breakpoints; geometric tail panels
/// are appended until the envelope bound, or an empirical power-law fit of
/// panel peaks, puts the remainder under a quarter of the tolerance. The
/// whole panel set is then refined adaptively.
pub(crate) fn half_line<T, F>(g: &mut F, m: usize, spec: &HalfLine<'_, T>, tol: Tol<T>, max_nodes: usize) -> Outcome<T>
where
    T: Real,
    F: FnMut(T, &mut [Complex<T>]) + ?Sized,
{
    let mut ad = Adaptive::new(m);
    let last_bp = spec
        .breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(T::zero(), T::max);
    let u0 = spec.initial.max(last_bp * lit::<T>(1.25) + T::one());
    for (a, b) in seed_panels(T::zero(), u0, spec.breakpoints, spec.max_width) {
        ad.add(g, a, b);
    }

    let quarter: T = lit(0.25);
    let half: T = lit(0.5);
    let mut hist: Vec<(T, Vec<T>)> = vec![(u0, ad.panels.last().unwrap().mag.clone())];
    let mut b = u0;
    let mut calm = 0;
    let reserved: Vec<T>;
    let (mut est, _) = ad.totals();
    loop {
        let budget: Vec<T> = est.iter().map(|v| tol.of(*v) * quarter).collect();
        let tail: Vec<T> = match spec.envelope {
            Some(env) => vec![envelope_tail(env, b); m],
            None => {
                let (b1, m1) = hist.last().unwrap();
                let reference = hist
                    .iter()
                    .rev()
                    .find(|(e, _)| *e <= *b1 * half)
                    .or_else(|| hist.first().filter(|(e, _)| *e < *b1));
                match reference {
                    Some((b0, m0)) => (0..m).map(|k| power_tail(m0[k], *b0, m1[k], *b1)).collect(),
                    None => vec![T::infinity(); m],
                }
            }
        };
        let ok = (0..m).all(|k| tail[k] <= budget[k]);
        calm = if ok { calm + 1 } else { 0 };
        let needed = if spec.envelope.is_some() { 1 } else { 2 };
        if calm >= needed {
            reserved = tail;
            break;
        }
        if ad.nodes + super::gk::GK_NODES > max_nodes || !b.is_finite() {
            let (values, error) = ad.totals();
            return Outcome {
                values,
                error: error.iter().zip(&tail).map(|(e, t)| *e + *t).collect(),
                nodes: ad.nodes,
                converged: false,
            };
        }
        let mut w = b * half;
        if let Some(mw) = spec.max_width {
            w = w.min(mw);
        }
        let i = ad.add(g, b, b + w);
        for (e, v) in est.iter_mut().zip(&ad.panels[i].est) {
            *e += *v;
        }
        b += w;
        hist.push((b, ad.panels[i].mag.clone()));
    }

    let converged = ad.refine(g, tol, &reserved, max_nodes);
    let (values, error) = ad.totals();
    Outcome {
        values,
        error: error.iter().zip(&reserved).map(|(e, t)| *e + *t).collect(),
        nodes: ad.nodes,
        converged,
    }
}

/// `∫_a^b g` over a finite interval with the same seeding and refinement.
pub(crate) fn interval<T, F>(
    g: &mut F,
    m: usize,
    a: T,
    b: T,
    breakpoints: &[T],
    max_width: Option<T>,
    tol: Tol<T>,
    max_nodes: usize,
) -> Outcome<T>
where
    T: Real,
    F: FnMut(T, &mut [Complex<T>]) + ?Sized,
{
    let mut ad = Adaptive::new(m);
    for (lo, hi) in seed_panels(a, b, breakpoints, max_width) {
        ad.add(g, lo, hi);
    }
    let converged = ad.refine(g, tol, &vec![T::zero(); m], max_nodes);
    let (values, error) = ad.totals();
    Outcome {
        values,
        error,
        nodes: ad.nodes,
        converged,
    }
}
