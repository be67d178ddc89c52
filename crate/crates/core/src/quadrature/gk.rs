//! Vector-valued adaptive Gauss–Kronrod (10/21) engine.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use crate::scalar::{lit, Real};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

/// Gauss 10-point weights for `XGK[1], XGK[3], …, XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

pub(crate) const GK_NODES: usize = 21;

/// One integration panel with per-component estimates.
#[derive(Debug, Clone)]
pub(crate) struct Panel<T> {
    pub a: T,
    pub b: T,
    pub est: Vec<Complex<T>>,
    pub err: Vec<T>,
    /// Largest `|f_k|` seen at the panel's nodes, per component.
    pub mag: Vec<T>,
    /// Every component's error is at the rounding floor; splitting cannot help.
    pub at_floor: bool,
}

/// Applies the 21-point Kronrod rule on `[a, b]`.
pub(crate) fn gk21<T, F>(f: &mut F, a: T, b: T, m: usize, buf: &mut Vec<Complex<T>>) -> Panel<T>
where
    T: Real,
    F: FnMut(T, &mut [Complex<T>]) + ?Sized,
{
    let half: T = lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    buf.clear();
    buf.resize(GK_NODES * m, Complex::new(T::zero(), T::zero()));
    // Slot 0: centre; slots 2j+1, 2j+2: c − h x_j, c + h x_j.
    f(c, &mut buf[..m]);
    for j in 0..10 {
        let dx = h * lit::<T>(XGK[j]);
        let (lo, hi) = buf[(2 * j + 1) * m..(2 * j + 3) * m].split_at_mut(m);
        f(c - dx, lo);
        f(c + dx, hi);
    }
    let eps = T::epsilon();
    let fifty: T = lit(50.0);
    let two_hundred: T = lit(200.0);
    let three_halves: T = lit(1.5);
    let mut est = Vec::with_capacity(m);
    let mut err = Vec::with_capacity(m);
    let mut mag = Vec::with_capacity(m);
    let mut at_floor = true;
    let wgk = |j: usize| lit::<T>(WGK[j]);
    for k in 0..m {
        let v = |slot: usize| buf[slot * m + k];
        let fc = v(0);
        let mut resk = fc * wgk(10);
        let mut resg = Complex::new(T::zero(), T::zero());
        let mut resabs = fc.norm() * wgk(10);
        let mut mx = fc.norm();
        for j in 0..10 {
            let (f1, f2) = (v(2 * j + 1), v(2 * j + 2));
            resk += (f1 + f2) * wgk(j);
            resabs += (f1.norm() + f2.norm()) * wgk(j);
            mx = mx.max(f1.norm()).max(f2.norm());
            if j % 2 == 1 {
                resg += (f1 + f2) * lit::<T>(WG[j / 2]);
            }
        }
        let mean = resk * half;
        let mut resasc = (fc - mean).norm() * wgk(10);
        for j in 0..10 {
            let (f1, f2) = (v(2 * j + 1), v(2 * j + 2));
            resasc += ((f1 - mean).norm() + (f2 - mean).norm()) * wgk(j);
        }
        let habs = h.abs();
        let resabs = resabs * habs;
        let resasc = resasc * habs;
        let mut e = ((resk - resg) * h).norm();
        if resasc > T::zero() && e > T::zero() {
            e = resasc * T::one().min((two_hundred * e / resasc).powf(three_halves));
        }
        let floor = fifty * eps * resabs;
        if resabs > T::min_positive_value() / (fifty * eps) {
            e = e.max(floor);
        }
        at_floor &= e <= floor * lit::<T>(2.0);
        if !e.is_finite() || !resk.re.is_finite() || !resk.im.is_finite() {
            e = T::infinity();
        }
        est.push(resk * h);
        err.push(e);
        mag.push(mx);
    }
    Panel {
        a,
        b,
        est,
        err,
        mag,
        at_floor,
    }
}

/// Per-component tolerance `max(abs, rel·|I_k|)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tol<T> {
    pub abs: T,
    pub rel: T,
}

impl<T: Real> Tol<T> {
    pub fn of(&self, v: Complex<T>) -> T {
        self.abs.max(self.rel * v.norm())
    }
}

struct Prio {
    key: f64,
    idx: usize,
}

impl PartialEq for Prio {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key && self.idx == o.idx
    }
}
impl Eq for Prio {}
impl PartialOrd for Prio {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Prio {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key
            .partial_cmp(&o.key)
            .unwrap_or(Ordering::Equal)
            .then(o.idx.cmp(&self.idx))
    }
}

/// A growing set of panels refined by global error priority.
pub(crate) struct Adaptive<T> {
    pub m: usize,
    pub panels: Vec<Panel<T>>,
    live: Vec<bool>,
    heap: BinaryHeap<Prio>,
    pub nodes: usize,
    buf: Vec<Complex<T>>,
}

impl<T: Real> Adaptive<T> {
    pub fn new(m: usize) -> Self {
        Adaptive {
            m,
            panels: Vec::new(),
            live: Vec::new(),
            heap: BinaryHeap::new(),
            nodes: 0,
            buf: Vec::new(),
        }
    }

    fn key(p: &Panel<T>) -> f64 {
        p.err
            .iter()
            .fold(0.0f64, |a, e| a.max(e.to_f64().unwrap_or(f64::INFINITY)))
    }

    /// Evaluates and stores a new panel, returning its index.
    pub fn add<F>(&mut self, f: &mut F, a: T, b: T) -> usize
    where
        F: FnMut(T, &mut [Complex<T>]) + ?Sized,
    {
        let p = gk21(f, a, b, self.m, &mut self.buf);
        self.nodes += GK_NODES;
        let idx = self.panels.len();
        self.heap.push(Prio {
            key: Self::key(&p),
            idx,
        });
        self.panels.push(p);
        self.live.push(true);
        idx
    }

    pub fn totals(&self) -> (Vec<Complex<T>>, Vec<T>) {
        let mut est = vec![Complex::new(T::zero(), T::zero()); self.m];
        let mut err = vec![T::zero(); self.m];
        for (p, &l) in self.panels.iter().zip(&self.live) {
            if l {
                for k in 0..self.m {
                    est[k] += p.est[k];
                    err[k] += p.err[k];
                }
            }
        }
        (est, err)
    }

    /// Bisects the worst panels until every component meets `tol`
    /// (after reserving `reserved_k` of it) or the node budget runs out.
    /// When only rounding-limited panels remain the result is accepted.
    pub fn refine<F>(&mut self, f: &mut F, tol: Tol<T>, reserved: &[T], max_nodes: usize) -> bool
    where
        F: FnMut(T, &mut [Complex<T>]) + ?Sized,
    {
        let (mut est, mut err) = self.totals();
        let mut since_resum = 0usize;
        let mut stuck = false;
        loop {
            let done = (0..self.m).all(|k| err[k] + reserved[k] <= tol.of(est[k]));
            if done {
                return true;
            }
            if self.nodes + 2 * GK_NODES > max_nodes {
                return false;
            }
            let Some(top) = self.heap.pop() else {
                return !stuck;
            };
            if self.panels[top.idx].at_floor {
                continue;
            }
            let (a, b) = (self.panels[top.idx].a, self.panels[top.idx].b);
            let mid = (a + b) * lit::<T>(0.5);
            let width_floor = lit::<T>(64.0) * T::epsilon() * a.abs().max(b.abs()).max(T::one());
            if (b - a).abs() <= width_floor || mid <= a.min(b) || mid >= a.max(b) {
                // Cannot be split further; keep its contribution as is.
                stuck = true;
                continue;
            }
            self.live[top.idx] = false;
            for k in 0..self.m {
                est[k] -= self.panels[top.idx].est[k];
                err[k] -= self.panels[top.idx].err[k];
            }
            for (lo, hi) in [(a, mid), (mid, b)] {
                let i = self.add(f, lo, hi);
                for k in 0..self.m {
                    est[k] += self.panels[i].est[k];
                    err[k] += self.panels[i].err[k];
                }
            }
            since_resum += 1;
            if since_resum == 512 {
                since_resum = 0;
                (est, err) = self.totals();
            }
        }
    }
}
