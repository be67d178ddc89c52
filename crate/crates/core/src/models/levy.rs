use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, sym_eigenvalues2};
use crate::scalar::{lit, real, Real};

/// A single atom of a finite (compound-Poisson) Lévy measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump<T> {
    pub size: Vec<T>,
    pub intensity: T,
}

/// Lévy triplet `(b, c, λ)` with a finite, atomic jump measure.
///
/// The compensator uses the truncation function `h(x) = x`, which is valid
/// because every atom has finite exponential moments of all orders.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriplet<T> {
    pub drift: Vec<T>,
    pub diffusion: Vec<Vec<T>>,
    pub jumps: Vec<Jump<T>>,
}

impl<T: Real> LevyTriplet<T> {
    pub fn new(drift: Vec<T>, diffusion: Vec<Vec<T>>, jumps: Vec<Jump<T>>) -> Result<Self> {
        let t = Self {
            drift,
            diffusion,
            jumps,
        };
        t.validate()?;
        Ok(t)
    }

    /// One-dimensional Brownian motion with drift `b` and variance rate `c`.
    pub fn brownian(drift: T, variance: T) -> Result<Self> {
        Self::new(vec![drift], vec![vec![variance]], Vec::new())
    }

    /// One-dimensional compound Poisson process plus drift.
    pub fn compound_poisson(drift: T, jumps: &[(T, T)]) -> Result<Self> {
        let jumps = jumps
            .iter()
            .map(|&(size, intensity)| Jump {
                size: vec![size],
                intensity,
            })
            .collect();
        Self::new(vec![drift], vec![vec![T::zero()]], jumps)
    }

    pub fn dimension(&self) -> usize {
        self.drift.len()
    }

    pub fn has_diffusion(&self) -> bool {
        self.diffusion.iter().flatten().any(|c| !c.is_zero())
    }

    fn validate(&self) -> Result<()> {
        let d = self.dimension();
        if d == 0 {
            return Err(Error::Parameter("triplet has dimension zero".into()));
        }
        if self.diffusion.len() != d || self.diffusion.iter().any(|row| row.len() != d) {
            return Err(Error::Parameter(format!("diffusion matrix must be {d}x{d}")));
        }
        let tol: T = lit(1e-12);
        for i in 0..d {
            for j in 0..i {
                if (self.diffusion[i][j] - self.diffusion[j][i]).abs() > tol {
                    return Err(Error::Parameter("diffusion matrix not symmetric".into()));
                }
            }
        }
        let as_f64: Vec<Vec<f64>> = self
            .diffusion
            .iter()
            .map(|row| row.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        if cholesky(&as_f64).is_none() {
            return Err(Error::Parameter(
                "diffusion matrix not positive semidefinite".into(),
            ));
        }
        for jump in &self.jumps {
            if jump.size.len() != d {
                return Err(Error::Parameter(format!("jump size must have dimension {d}")));
            }
            if !(jump.intensity >= T::zero()) {
                return Err(Error::Parameter("jump intensity must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Smallest eigenvalue of the diffusion matrix (d <= 2), zero otherwise.
    pub(crate) fn min_diffusion_eigenvalue(&self) -> T {
        match self.dimension() {
            1 => self.diffusion[0][0],
            2 => {
                let m = [
                    [self.diffusion[0][0], self.diffusion[0][1]],
                    [self.diffusion[1][0], self.diffusion[1][1]],
                ];
                sym_eigenvalues2(&m)[0].max(T::zero())
            }
            _ => T::zero(),
        }
    }
}

/// Lévy–Khintchine cumulant `κ(u) = <b,u> + ½<u,cu> + Σ λ_j (e^{<u,x_j>} − 1 − <u,x_j>)`.
///
/// The jump measure is finite and atomic, so κ exists for every complex `u`.
pub fn cumulant_lk<T: Real>(triplet: &LevyTriplet<T>, u: &[Complex<T>]) -> Result<Complex<T>> {
    let d = triplet.dimension();
    if u.len() != d {
        return Err(Error::Parameter(format!(
            "argument has dimension {}, triplet has {d}",
            u.len()
        )));
    }
    let half: T = lit(0.5);
    let mut k = Complex::new(T::zero(), T::zero());
    for i in 0..d {
        k += u[i] * triplet.drift[i];
        let mut cu = Complex::new(T::zero(), T::zero());
        for j in 0..d {
            cu += u[j] * triplet.diffusion[i][j];
        }
        k += u[i] * cu * half;
    }
    for jump in &triplet.jumps {
        let ux = u
            .iter()
            .zip(&jump.size)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, &x)| acc + a * x);
        k += (ux.exp() - real(T::one()) - ux) * jump.intensity;
    }
    Ok(k)
}

pub(crate) fn cumulant_real<T: Real>(triplet: &LevyTriplet<T>, r: &[T]) -> T {
    let u: Vec<Complex<T>> = r.iter().map(|&x| real(x)).collect();
    cumulant_lk(triplet, &u).map(|c| c.re).unwrap_or(T::infinity())
}
