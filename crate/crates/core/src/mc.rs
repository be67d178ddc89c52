//! Monte-Carlo valuation used as an independent check of the Fourier prices.
//!
//! Paths are generated in fixed-size blocks; block `b` draws from the ChaCha8
//! stream `b` of the configured seed, and block statistics are merged in block
//! order, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, InverseGaussian, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::models::{DhsvParams, LevyTriplet, ModelSpec};
use crate::payoffs::PayoffSpec;
use crate::pricer::PriceRequest;

const BLOCK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub paths: usize,
    /// Euler steps over the longest maturity (stochastic volatility only).
    pub steps: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            paths: 1_000_000,
            steps: 500,
            seed: 20_240_601,
            antithetic: true,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths < 10_000 {
            return Err(Error::Parameter(format!("at least 10^4 paths needed, got {}", self.paths)));
        }
        if self.steps == 0 {
            return Err(Error::Parameter("steps must be positive".into()));
        }
        Ok(())
    }

    /// Each draw yields a path and its partner.
    fn draws(&self) -> usize {
        self.paths.div_ceil(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
}

impl McEstimate {
    fn new(mean: f64, std_error: f64) -> Self {
        McEstimate {
            mean,
            std_error,
            ci95: (mean - 1.96 * std_error, mean + 1.96 * std_error),
        }
    }

    /// Whether `x` lies within `k` standard errors of the mean.
    pub fn brackets(&self, x: f64, k: f64) -> bool {
        (x - self.mean).abs() <= k * self.std_error
    }
}

/// Running mean and centred second moment.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        McEstimate::new(self.mean, (var / self.n).sqrt())
    }
}

fn normals(rng: &mut ChaCha8Rng, z: &mut [f64]) {
    for x in z.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
}

fn lower_mul(l: &[Vec<f64>], z: &[f64], out: &mut [f64]) {
    for i in 0..l.len() {
        out[i] = (0..=i).map(|k| l[i][k] * z[k]).sum();
    }
}

/// Exact increments of a Lévy process with Gaussian part and finitely many atoms.
struct LevySampler {
    drift: Vec<f64>,
    chol: Vec<Vec<f64>>,
    jumps: Vec<(Vec<f64>, f64)>,
}

impl LevySampler {
    fn new(tr: &LevyTriplet<f64>) -> Result<Self> {
        let chol = cholesky(&tr.diffusion)
            .ok_or_else(|| Error::Parameter("diffusion matrix is not positive semidefinite".into()))?;
        let mut drift = tr.drift.clone();
        for j in &tr.jumps {
            for (b, x) in drift.iter_mut().zip(&j.size) {
                *b -= j.intensity * x;
            }
        }
        Ok(LevySampler {
            drift,
            chol,
            jumps: tr.jumps.iter().map(|j| (j.size.clone(), j.intensity)).collect(),
        })
    }

    fn increment(&self, rng: &mut ChaCha8Rng, dt: f64, a: &mut [f64], b: &mut [f64], z: &mut [f64], w: &mut [f64]) {
        let d = a.len();
        normals(rng, &mut z[..d]);
        lower_mul(&self.chol, &z[..d], w);
        let s = dt.sqrt();
        for i in 0..d {
            a[i] += self.drift[i] * dt + s * w[i];
            b[i] += self.drift[i] * dt - s * w[i];
        }
        for (x, lam) in &self.jumps {
            let mean = lam * dt;
            if mean <= 0.0 {
                continue;
            }
            let n: f64 = Poisson::new(mean).expect("positive Poisson mean").sample(rng);
            for i in 0..d {
                a[i] += n * x[i];
                b[i] += n * x[i];
            }
        }
    }
}

/// Normal mean-variance mixture over an inverse-Gaussian subordinator.
struct NigSampler {
    mu: Vec<f64>,
    /// `Δβ`
    skew: Vec<f64>,
    chol: Vec<Vec<f64>>,
    delta: f64,
    gamma: f64,
}

impl NigSampler {
    fn increment(&self, rng: &mut ChaCha8Rng, dt: f64, a: &mut [f64], b: &mut [f64], z: &mut [f64], w: &mut [f64]) {
        let d = a.len();
        let mean = self.delta * dt / self.gamma;
        let shape = (self.delta * dt).powi(2);
        let ig: f64 = InverseGaussian::new(mean, shape).expect("positive IG parameters").sample(rng);
        normals(rng, &mut z[..d]);
        lower_mul(&self.chol, &z[..d], w);
        let s = ig.sqrt();
        for i in 0..d {
            let c = self.mu[i] * dt + ig * self.skew[i];
            a[i] += c + s * w[i];
            b[i] += c - s * w[i];
        }
    }
}

/// Full-truncation Euler for two log-prices driven by one square-root variance.
struct DhsvSampler {
    p: DhsvParams<f64>,
    chol: Vec<Vec<f64>>,
    /// Step ends; every maturity is one of them.
    grid: Vec<f64>,
}

impl DhsvSampler {
    fn new(p: &DhsvParams<f64>, times: &[f64], steps: usize) -> Result<Self> {
        let chol = cholesky(&p.correlation_f64())
            .ok_or_else(|| Error::Parameter("correlation matrix is not positive semidefinite".into()))?;
        let tmax = times.iter().cloned().fold(0.0, f64::max);
        let mut grid: Vec<f64> = (1..=steps).map(|k| tmax * k as f64 / steps as f64).collect();
        grid.extend_from_slice(times);
        grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
        grid.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * tmax);
        Ok(DhsvSampler { p: *p, chol, grid })
    }

    /// Paths `a` and its antithetic mirror `b`, recorded at `times`.
    fn paths(&self, rng: &mut ChaCha8Rng, times: &[f64], a: &mut [f64], b: &mut [f64]) {
        let p = &self.p;
        let [s1, s2, s3] = p.sigma;
        let mut z = [0.0; 3];
        let mut w = [0.0; 3];
        let mut sa = [0.0, 0.0, p.v0];
        let mut sb = sa;
        let mut t = 0.0;
        let mut next = 0;
        for &tk in &self.grid {
            let dt = tk - t;
            normals(rng, &mut z);
            lower_mul(&self.chol, &z, &mut w);
            let sq = dt.sqrt();
            for (st, sign) in [(&mut sa, 1.0), (&mut sb, -1.0)] {
                let v = st[2].max(0.0);
                let vs = v.sqrt() * sq * sign;
                st[0] += (p.carry - 0.5 * s1 * s1 * v) * dt + s1 * vs * w[0];
                st[1] += (p.carry - 0.5 * s2 * s2 * v) * dt + s2 * vs * w[1];
                st[2] += p.kappa * (p.mu_v - v) * dt + s3 * vs * w[2];
            }
            t = tk;
            while next < times.len() && (times[next] - t).abs() <= 1e-12 * t.max(1.0) {
                a[2 * next..2 * next + 2].copy_from_slice(&sa[..2]);
                b[2 * next..2 * next + 2].copy_from_slice(&sb[..2]);
                next += 1;
            }
        }
    }
}

enum Sampler {
    Levy(LevySampler),
    Nig(NigSampler),
    Dhsv(DhsvSampler),
}

impl Sampler {
    fn new(model: &ModelSpec<f64>, times: &[f64], steps: usize) -> Result<Self> {
        Ok(match model {
            ModelSpec::Brownian1d(tr) | ModelSpec::CompoundPoissonDrift1d(tr) | ModelSpec::GenericLevy(tr) => {
                Sampler::Levy(LevySampler::new(tr)?)
            }
            ModelSpec::Nig1d(p) => Sampler::Nig(NigSampler {
                mu: vec![p.mu],
                skew: vec![p.beta],
                chol: vec![vec![1.0]],
                delta: p.delta,
                gamma: (p.alpha * p.alpha - p.beta * p.beta).sqrt(),
            }),
            ModelSpec::Nig2d(p) => {
                let m = p.delta_matrix;
                let chol = cholesky(&[m[0].to_vec(), m[1].to_vec()])
                    .ok_or_else(|| Error::Parameter("Delta is not positive definite".into()))?;
                Sampler::Nig(NigSampler {
                    mu: p.mu.to_vec(),
                    skew: vec![
                        m[0][0] * p.beta[0] + m[0][1] * p.beta[1],
                        m[1][0] * p.beta[0] + m[1][1] * p.beta[1],
                    ],
                    chol,
                    delta: p.delta,
                    gamma: p.gamma_sq().sqrt(),
                })
            }
            ModelSpec::Dhsv2d(p) => Sampler::Dhsv(DhsvSampler::new(p, times, steps)?),
        })
    }

    /// Log-returns at every time for a path and a partner path. The partner is
    /// the antithetic mirror when `anti` holds and an independent path otherwise.
    fn draw(&self, rng: &mut ChaCha8Rng, times: &[f64], d: usize, anti: bool, a: &mut [f64], b: &mut [f64]) {
        match self {
            Sampler::Dhsv(s) => {
                s.paths(rng, times, a, b);
                if !anti {
                    let mut scratch = vec![0.0; b.len()];
                    s.paths(rng, times, b, &mut scratch);
                }
            }
            _ => {
                let mut z = [0.0; 3];
                let mut w = [0.0; 3];
                let mut ca = [0.0; 3];
                let mut cb = [0.0; 3];
                let mut scratch = [0.0; 3];
                let mut t = 0.0;
                for (k, &tk) in times.iter().enumerate() {
                    let dt = tk - t;
                    if anti {
                        self.increment(rng, dt, &mut ca[..d], &mut cb[..d], &mut z, &mut w);
                    } else {
                        self.increment(rng, dt, &mut ca[..d], &mut scratch[..d], &mut z, &mut w);
                        self.increment(rng, dt, &mut cb[..d], &mut scratch[..d], &mut z, &mut w);
                    }
                    a[k * d..(k + 1) * d].copy_from_slice(&ca[..d]);
                    b[k * d..(k + 1) * d].copy_from_slice(&cb[..d]);
                    t = tk;
                }
            }
        }
    }

    fn increment(&self, rng: &mut ChaCha8Rng, dt: f64, a: &mut [f64], b: &mut [f64], z: &mut [f64], w: &mut [f64]) {
        match self {
            Sampler::Levy(s) => s.increment(rng, dt, a, b, z, w),
            Sampler::Nig(s) => s.increment(rng, dt, a, b, z, w),
            Sampler::Dhsv(_) => unreachable!("stochastic volatility paths are not incremental"),
        }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::Parameter("maturities must be positive".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("maturities must be strictly increasing".into()));
    }
    Ok(())
}

/// Accumulates `stat(k, x, out)` for every time `k` over all samples, where
/// `x` holds the log-returns at `times[k]` and `out` has `width` slots.
fn run<F>(model: &ModelSpec<f64>, times: &[f64], cfg: &McConfig, width: usize, stat: F) -> Result<Vec<McEstimate>>
where
    F: Fn(usize, &[f64], &mut [f64]) + Sync,
{
    cfg.validate()?;
    check_times(times)?;
    let d = model.dimension();
    if d > 3 {
        return Err(Error::Parameter(format!("at most three assets supported, got {d}")));
    }
    let sampler = Sampler::new(model, times, cfg.steps)?;
    let n = cfg.draws();
    let blocks = n.div_ceil(BLOCK);
    let nt = times.len();
    let per_block: Vec<Vec<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(blk as u64);
            let mut acc = vec![Moments::default(); nt * width];
            let mut a = vec![0.0; nt * d];
            let mut b = vec![0.0; nt * d];
            let mut va = vec![0.0; width];
            let mut vb = vec![0.0; width];
            let count = BLOCK.min(n - blk * BLOCK);
            for _ in 0..count {
                sampler.draw(&mut rng, times, d, cfg.antithetic, &mut a, &mut b);
                for k in 0..nt {
                    stat(k, &a[k * d..(k + 1) * d], &mut va);
                    stat(k, &b[k * d..(k + 1) * d], &mut vb);
                    for j in 0..width {
                        let m = &mut acc[k * width + j];
                        if cfg.antithetic {
                            m.push(0.5 * (va[j] + vb[j]));
                        } else {
                            m.push(va[j]);
                            m.push(vb[j]);
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Moments::default(); nt * width];
    for blk in &per_block {
        for (t, m) in total.iter_mut().zip(blk) {
            t.merge(m);
        }
    }
    Ok(total.iter().map(Moments::estimate).collect())
}

/// Terminal log-returns `X_T`, one row per path.
pub fn simulate_terminal(model: &ModelSpec<f64>, maturity: f64, cfg: &McConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    check_times(&[maturity])?;
    let d = model.dimension();
    let times = [maturity];
    let sampler = Sampler::new(model, &times, cfg.steps)?;
    let n = cfg.draws();
    let blocks = n.div_ceil(BLOCK);
    let out: Vec<Vec<Vec<f64>>> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(blk as u64);
            let mut a = vec![0.0; d];
            let mut b = vec![0.0; d];
            let count = BLOCK.min(n - blk * BLOCK);
            let mut rows = Vec::with_capacity(2 * count);
            for _ in 0..count {
                sampler.draw(&mut rng, &times, d, cfg.antithetic, &mut a, &mut b);
                rows.push(a.clone());
                rows.push(b.clone());
            }
            rows
        })
        .collect();
    let mut rows: Vec<Vec<f64>> = out.into_iter().flatten().collect();
    rows.truncate(cfg.paths);
    Ok(rows)
}

/// Discounted sample mean of the payoff.
pub fn price_mc(req: &PriceRequest<f64>, cfg: &McConfig) -> Result<McEstimate> {
    let grid = price_mc_grid(req, &[None], &[req.maturity], cfg)?;
    Ok(grid[0][0])
}

/// Estimates for `req.payoff.with_strike(K)` over strikes and maturities on
/// common paths; `None` keeps the request's own payoff. Indexed `[maturity][strike]`.
pub fn price_mc_grid(
    req: &PriceRequest<f64>,
    strikes: &[Option<f64>],
    maturities: &[f64],
    cfg: &McConfig,
) -> Result<Vec<Vec<McEstimate>>> {
    let d = req.payoff.dimension();
    if req.model.dimension() != d || req.spot.len() != d {
        return Err(Error::Parameter("payoff, model and spot dimensions disagree".into()));
    }
    let payoffs: Vec<PayoffSpec<f64>> = strikes
        .iter()
        .map(|k| k.map_or_else(|| req.payoff.clone(), |k| req.payoff.with_strike(k)))
        .collect();
    for p in &payoffs {
        p.validate()?;
    }
    let log_spot: Vec<f64> = req.spot.iter().map(|s| s.ln()).collect();
    let width = payoffs.len();
    let est = run(&req.model, maturities, cfg, width, |k, x, out| {
        let disc = (-req.rate * maturities[k]).exp();
        let mut lx = [0.0; 3];
        for i in 0..d {
            lx[i] = log_spot[i] + x[i];
        }
        for (o, p) in out.iter_mut().zip(&payoffs) {
            *o = disc * p.payoff_eval(&lx[..d]);
        }
    })?;
    Ok(est.chunks(width).map(|c| c.to_vec()).collect())
}

/// Empirical `P(X_T ≤ x)` for a univariate model.
pub fn cdf_mc(model: &ModelSpec<f64>, maturity: f64, x: f64, cfg: &McConfig) -> Result<McEstimate> {
    if model.dimension() != 1 {
        return Err(Error::Parameter("empirical CDF needs a univariate model".into()));
    }
    let plain = McConfig {
        antithetic: false,
        ..cfg.clone()
    };
    let e = run(model, &[maturity], &plain, 1, |_, v, out| out[0] = if v[0] <= x { 1.0 } else { 0.0 })?;
    let p = e[0].mean;
    let n = (2 * plain.draws()) as f64;
    Ok(McEstimate::new(p, (p * (1.0 - p) / n).sqrt()))
}

/// Sample means of `e^{X_T^i}` for each component.
pub fn forward_mc(model: &ModelSpec<f64>, maturity: f64, cfg: &McConfig) -> Result<Vec<McEstimate>> {
    let d = model.dimension();
    run(model, &[maturity], cfg, d, |_, x, out| {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = xi.exp();
        }
    })
}
