//! Numerical inversion engines.
//!
//! All integrators are vector-valued internally so that one node set serves
//! many integrands at once (a strike grid shares the model factor).

mod capped;
pub(crate) mod gk;
pub(crate) mod line;
pub(crate) mod nested;

use num_complex::Complex;

pub use capped::detect_convergence;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use gk::Tol;
use line::HalfLine;
use nested::Stats;

/// Truncation weighting applied on each cap level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapWindow {
    /// Plain `∫_{−A}^{A}`.
    Raw,
    /// `∫ h(u) φ(|u|/A)` with a smooth step `φ` equal to 1 on `[0, 1]` and 0
    /// beyond 2. Same limit as the raw caps whenever that limit exists, with
    /// the `O(1/A)` oscillation of jump-type integrands suppressed.
    Taper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    /// Node budget for each one-dimensional integration.
    pub max_nodes: usize,
    /// Initial truncation `U₀` for improper integrals; `None` uses `cap_initial`.
    pub initial_truncation: Option<T>,
    /// `A₀` of the cap schedule `A_k = A₀·2^k`.
    pub cap_initial: T,
    /// Largest `k` in the cap schedule.
    pub cap_max_doublings: usize,
    pub cap_window: CapWindow,
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        QuadConfig {
            abs_tol: lit(1e-9),
            rel_tol: lit(1e-8),
            max_nodes: 2_000_000,
            initial_truncation: None,
            cap_initial: lit(50.0),
            cap_max_doublings: 12,
            cap_window: CapWindow::Taper,
        }
    }
}

impl<T: Real> QuadConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero() && self.rel_tol > T::zero()) {
            return Err(Error::Parameter("quadrature tolerances must be positive".into()));
        }
        if !(self.cap_initial > T::zero() && self.cap_initial.is_finite()) {
            return Err(Error::Parameter("initial cap must be positive".into()));
        }
        if let Some(u) = self.initial_truncation {
            if !(u > T::zero()) {
                return Err(Error::Parameter("initial truncation must be positive".into()));
            }
        }
        if self.max_nodes < 2 * gk::GK_NODES {
            return Err(Error::Parameter("node budget too small".into()));
        }
        Ok(())
    }

    pub(crate) fn tol(&self) -> Tol<T> {
        Tol {
            abs: self.abs_tol,
            rel: self.rel_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapResult<T> {
    pub value: Complex<T>,
    pub cap_used: T,
    pub converged: bool,
    /// Largest distance among the last three cap levels.
    pub oscillation_amplitude: T,
    /// Value at every cap level evaluated.
    pub levels: Vec<Complex<T>>,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineResult<T> {
    pub value: Complex<T>,
    pub error: T,
    pub nodes: usize,
}

/// Hints for the improper integrators.
pub struct LineOptions<'a, T> {
    /// `h(−u) = conj h(u)`: integrate `u ≥ 0` only and double the real part.
    pub hermitian: bool,
    /// Angular frequency of the integrand; caps panel widths at `4π/(ω+1)`.
    pub omega: Option<T>,
    /// Positions `|u|` of kinks or near-singularities.
    pub breakpoints: Vec<T>,
    /// `|h(±u)| ≤ E(x)` for all `|u| ≥ x`, per component.
    pub envelope: Option<&'a dyn Fn(T) -> T>,
}

impl<T> Default for LineOptions<'_, T> {
    fn default() -> Self {
        LineOptions {
            hermitian: false,
            omega: None,
            breakpoints: Vec::new(),
            envelope: None,
        }
    }
}

pub(crate) fn osc_width<T: Real>(omega: T) -> T {
    lit::<T>(4.0) * T::PI() / (omega.abs() + T::one())
}

/// Vector-valued `∫_ℝ h` for `m` components sharing one node set.
pub(crate) fn line_vec<T: Real>(
    h: &mut dyn FnMut(T, &mut [Complex<T>]),
    m: usize,
    opts: &LineOptions<'_, T>,
    cfg: &QuadConfig<T>,
) -> line::Outcome<T> {
    let two = lit::<T>(2.0);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); m];
    let hermitian = opts.hermitian;
    let mut g = |v: T, out: &mut [Complex<T>]| {
        h(v, out);
        if !hermitian {
            h(-v, &mut scratch);
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += *s;
            }
        }
    };
    let env2;
    let envelope: Option<&dyn Fn(T) -> T> = match opts.envelope {
        Some(e) if !hermitian => {
            env2 = move |x: T| two * e(x);
            Some(&env2)
        }
        other => other,
    };
    let spec = HalfLine {
        breakpoints: &opts.breakpoints,
        max_width: opts.omega.map(osc_width),
        envelope,
        initial: cfg.initial_truncation.unwrap_or(cfg.cap_initial),
    };
    let mut o = line::half_line(&mut g, m, &spec, cfg.tol(), cfg.max_nodes);
    if hermitian {
        finish_hermitian(&mut o);
    }
    o
}

fn finish_hermitian<T: Real>(o: &mut line::Outcome<T>) {
    let two = lit::<T>(2.0);
    for v in o.values.iter_mut() {
        *v = Complex::new(two * v.re, T::zero());
    }
    for e in o.error.iter_mut() {
        *e = two * *e;
    }
}

/// Vector-valued capped integration over symmetric caps.
pub(crate) fn capped_vec<T: Real>(
    h: &mut dyn FnMut(T, &mut [Complex<T>]),
    m: usize,
    opts: &LineOptions<'_, T>,
    cfg: &QuadConfig<T>,
) -> (Vec<CapResult<T>>, usize) {
    let two = lit::<T>(2.0);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); m];
    let hermitian = opts.hermitian;
    let mut g = |v: T, out: &mut [Complex<T>]| {
        h(v, out);
        if !hermitian {
            h(-v, &mut scratch);
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += *s;
            }
        }
    };
    let finish = move |v: Complex<T>| {
        if hermitian {
            Complex::new(two * v.re, T::zero())
        } else {
            v
        }
    };
    capped::capped_half_line(
        &mut g,
        m,
        &opts.breakpoints,
        Some(osc_width(opts.omega.unwrap_or(T::one()))),
        cfg,
        &finish,
    )
}

/// Vector-valued `∫_{ℝ^d} h` by iterated integration.
pub(crate) fn nd_vec<T: Real>(
    h: &mut dyn FnMut(&[T], &mut [Complex<T>]),
    d: usize,
    m: usize,
    hermitian: bool,
    omega: Option<T>,
    ridges: &[Vec<T>],
    cfg: &QuadConfig<T>,
) -> (line::Outcome<T>, usize) {
    let mut point = Vec::with_capacity(d);
    let mut stats = Stats {
        leaves: 0,
        converged: true,
    };
    let mut o = nested::nested_line(h, d, m, hermitian, omega, ridges, cfg.tol(), cfg, &mut point, &mut stats);
    o.converged &= stats.converged;
    if hermitian {
        finish_hermitian(&mut o);
    }
    (o, stats.leaves)
}

fn accuracy<T: Real>(value: Complex<T>, error: T, nodes: usize) -> Error {
    Error::Accuracy {
        estimate: value.re.to_f64().unwrap_or(f64::NAN),
        error: error.to_f64().unwrap_or(f64::NAN),
        nodes,
    }
}

/// `∫_ℝ h(u) du` for an absolutely integrable `h`.
pub fn integrate_line<T: Real>(mut h: impl FnMut(T) -> Complex<T>, cfg: &QuadConfig<T>) -> Result<Complex<T>> {
    integrate_line_with(&mut h, &LineOptions::default(), cfg).map(|r| r.value)
}

/// [`integrate_line`] with hints and diagnostics.
pub fn integrate_line_with<T: Real>(
    h: &mut dyn FnMut(T) -> Complex<T>,
    opts: &LineOptions<'_, T>,
    cfg: &QuadConfig<T>,
) -> Result<LineResult<T>> {
    cfg.validate()?;
    let mut hv = |u: T, out: &mut [Complex<T>]| out[0] = h(u);
    let o = line_vec(&mut hv, 1, opts, cfg);
    if !o.converged {
        return Err(accuracy(o.values[0], o.error[0], o.nodes));
    }
    Ok(LineResult {
        value: o.values[0],
        error: o.error[0],
        nodes: o.nodes,
    })
}

/// `∫_{ℝ^d} h(u) du` by iterated adaptive integration (`d ≤ 3`).
///
/// `ridges` lists normals `c` of hyperplanes `<c, u> = 0` where `h` has
/// kinks or sharp peaks; they become breakpoints of the inner integrals.
pub fn integrate_nd<T: Real>(
    h: &mut dyn FnMut(&[T]) -> Complex<T>,
    d: usize,
    ridges: &[Vec<T>],
    opts: &LineOptions<'_, T>,
    cfg: &QuadConfig<T>,
) -> Result<LineResult<T>> {
    cfg.validate()?;
    if !(1..=3).contains(&d) {
        return Err(Error::Parameter(format!("dimension {d} not supported")));
    }
    let mut hv = |u: &[T], out: &mut [Complex<T>]| out[0] = h(u);
    let (o, leaves) = nd_vec(&mut hv, d, 1, opts.hermitian, opts.omega, ridges, cfg);
    if !o.converged {
        return Err(accuracy(o.values[0], o.error[0], leaves));
    }
    Ok(LineResult {
        value: o.values[0],
        error: o.error[0],
        nodes: leaves,
    })
}

/// `lim_{A→∞} ∫_{−A}^{A} h(u) du` along the cap schedule.
pub fn integrate_capped<T: Real>(mut h: impl FnMut(T) -> Complex<T>, cfg: &QuadConfig<T>) -> CapResult<T> {
    integrate_capped_with(&mut h, &LineOptions::default(), cfg)
}

pub fn integrate_capped_with<T: Real>(
    h: &mut dyn FnMut(T) -> Complex<T>,
    opts: &LineOptions<'_, T>,
    cfg: &QuadConfig<T>,
) -> CapResult<T> {
    let mut hv = |u: T, out: &mut [Complex<T>]| out[0] = h(u);
    let (mut r, _) = capped_vec(&mut hv, 1, opts, cfg);
    r.remove(0)
}

/// `lim ∫_{[−A_k, A_k]^d} h` along the cap schedule, `d ∈ {2, 3}`.
///
/// Each level is an iterated adaptive integral over the cube; with the
/// taper window the cube is `[−2A_k, 2A_k]^d` weighted by `Π φ(|u_j|/A_k)`.
pub fn integrate_cube_capped<T: Real>(
    h: &mut dyn FnMut(&[T]) -> Complex<T>,
    d: usize,
    cfg: &QuadConfig<T>,
) -> Result<CapResult<T>> {
    let mut hv = |u: &[T], out: &mut [Complex<T>]| out[0] = h(u);
    cube_vec(&mut hv, d, 1, false, None, cfg).map(|mut r| r.remove(0))
}

pub(crate) fn cube_vec<T: Real>(
    h: &mut dyn FnMut(&[T], &mut [Complex<T>]),
    d: usize,
    m: usize,
    hermitian: bool,
    omega: Option<T>,
    cfg: &QuadConfig<T>,
) -> Result<Vec<CapResult<T>>> {
    cfg.validate()?;
    if !(2..=3).contains(&d) {
        return Err(Error::Parameter(format!("cube caps need d in {{2, 3}}, got {d}")));
    }
    let two = lit::<T>(2.0);
    let eighth = lit::<T>(0.125);
    let finish = |v: Complex<T>| if hermitian { Complex::new(two * v.re, T::zero()) } else { v };
    let mut levels: Vec<Vec<Complex<T>>> = vec![Vec::new(); m];
    let mut cap_used = T::zero();
    let mut nodes = 0usize;
    let mut all_ok = true;
    let width = Some(osc_width(omega.unwrap_or(T::one())));
    for k in 0..=cfg.cap_max_doublings {
        let ak = cfg.cap_initial * T::from_usize(1usize << k.min(60)).unwrap();
        let (half_width, weight): (T, Box<dyn Fn(T) -> T>) = match cfg.cap_window {
            CapWindow::Raw => (ak, Box::new(|_| T::one())),
            CapWindow::Taper => (ak + ak, Box::new(move |u: T| capped::taper(u.abs() / ak))),
        };
        let bps = [-ak, T::zero(), ak];
        let mut point = Vec::with_capacity(d);
        let mut stats = Stats {
            leaves: 0,
            converged: true,
        };
        let big = levels
            .iter()
            .filter_map(|l| l.last())
            .fold(T::zero(), |a, v| a.max(v.norm()));
        let tol = Tol {
            abs: (cfg.abs_tol * eighth).max(cfg.rel_tol * eighth * big),
            rel: T::zero(),
        };
        let o = nested::nested_box(h, d, m, half_width, hermitian, &*weight, &bps, width, tol, cfg, &mut point, &mut stats);
        nodes += stats.leaves;
        if !o.converged || !stats.converged {
            if levels[0].is_empty() {
                return Err(accuracy(finish(o.values[0]), o.error[0], nodes));
            }
            all_ok = false;
            break;
        }
        for i in 0..m {
            levels[i].push(finish(o.values[i]));
        }
        cap_used = ak;
        if levels
            .iter()
            .all(|l| detect_convergence(l, cfg.abs_tol, cfg.rel_tol).0)
        {
            break;
        }
    }
    Ok(levels
        .into_iter()
        .map(|lv| {
            let (conv, amp) = detect_convergence(&lv, cfg.abs_tol, cfg.rel_tol);
            CapResult {
                value: *lv.last().unwrap(),
                cap_used,
                converged: conv && all_ok,
                oscillation_amplitude: amp,
                levels: lv,
                nodes,
            }
        })
        .collect())
}

/// Capped spherical inversion of the unit-ball indicator in ℝ³ at the origin:
/// `(2/π) ∫_0^A (sin r − r cos r)/r dr`, which tends to `1 − (2/π) sin A`.
pub fn pinsky_spherical_demo<T: Real>(a: T) -> T {
    let cfg = QuadConfig::<T> {
        abs_tol: lit(1e-12),
        rel_tol: lit(1e-12),
        ..QuadConfig::default()
    };
    let small: T = lit(1e-4);
    let mut g = |r: T, out: &mut [Complex<T>]| {
        let v = if r.abs() < small {
            // Series of (sin r − r cos r)/r = r²/3 − r⁴/30 + …
            let r2 = r * r;
            r2 / lit(3.0) - r2 * r2 / lit(30.0)
        } else {
            (r.sin() - r * r.cos()) / r
        };
        out[0] = Complex::new(v, T::zero());
    };
    let o = line::interval(&mut g, 1, T::zero(), a, &[], Some(T::PI()), cfg.tol(), cfg.max_nodes);
    lit::<T>(2.0) / T::PI() * o.values[0].re
}

/// Runs the convergence detector on the Pinsky values at `caps`.
pub fn pinsky_cap_result<T: Real>(caps: &[T], cfg: &QuadConfig<T>) -> CapResult<T> {
    let levels: Vec<Complex<T>> = caps
        .iter()
        .map(|&a| Complex::new(pinsky_spherical_demo(a), T::zero()))
        .collect();
    let (converged, amp) = detect_convergence(&levels, cfg.abs_tol, cfg.rel_tol);
    CapResult {
        value: levels.last().copied().unwrap_or_default(),
        cap_used: caps.last().copied().unwrap_or(T::zero()),
        converged,
        oscillation_amplitude: amp,
        levels,
        nodes: 0,
    }
}
