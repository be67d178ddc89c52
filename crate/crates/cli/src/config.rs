//! JSON configuration for models, payoffs and grid jobs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fourval::models::{DhsvParams, Jump, LevyTriplet, ModelSpec, Nig1dParams, Nig2dParams};
use fourval::payoffs::PayoffSpec;
use fourval::{McConfig, Quad};

use crate::CliError;

/// Driving process, tagged by `kind`. A drift left out is fixed by the
/// martingale condition for the job's rates; a drift given is used as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ModelConfig {
    Brownian1d {
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    CompoundPoissonDrift1d {
        jumps: Vec<JumpConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
    },
    #[serde(rename = "NIG1d")]
    Nig1d {
        alpha: f64,
        beta: f64,
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
    },
    #[serde(rename = "NIG2d")]
    Nig2d {
        alpha: f64,
        beta: [f64; 2],
        delta: f64,
        #[serde(rename = "Delta")]
        delta_matrix: [[f64; 2]; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<[f64; 2]>,
    },
    /// Always carries `r − q`; there is no free drift.
    #[serde(rename = "DHSV2d")]
    Dhsv2d {
        sigma1: f64,
        sigma2: f64,
        sigma3: f64,
        rho12: f64,
        rho13: f64,
        rho23: f64,
        v0: f64,
        kappa: f64,
        mu_v: f64,
        #[serde(rename = "H0", default)]
        h0: [f64; 2],
    },
    GenericLevy {
        c: Vec<Vec<f64>>,
        #[serde(default)]
        jumps: Vec<JumpConfigNd>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
    },
}

/// Jump of size `x` with intensity `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub x: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfigNd {
    pub x: Vec<f64>,
    pub lambda: f64,
}

impl ModelConfig {
    /// Model for rate `r` and dividend yield `q`.
    pub fn build(&self, rate: f64, dividend: f64) -> Result<ModelSpec<f64>, CliError> {
        let (m, given) = match self {
            ModelConfig::Brownian1d { sigma, b } => (ModelSpec::brownian(b.unwrap_or(0.0), sigma * sigma)?, b.is_some()),
            ModelConfig::CompoundPoissonDrift1d { jumps, b } => {
                let j: Vec<(f64, f64)> = jumps.iter().map(|j| (j.x, j.lambda)).collect();
                (ModelSpec::compound_poisson(b.unwrap_or(0.0), &j)?, b.is_some())
            }
            ModelConfig::Nig1d { alpha, beta, delta, mu } => (
                ModelSpec::Nig1d(Nig1dParams::new(*alpha, *beta, *delta, mu.unwrap_or(0.0))?),
                mu.is_some(),
            ),
            ModelConfig::Nig2d {
                alpha,
                beta,
                delta,
                delta_matrix,
                mu,
            } => (
                ModelSpec::Nig2d(Nig2dParams::new(*alpha, *beta, *delta, mu.unwrap_or([0.0; 2]), *delta_matrix)?),
                mu.is_some(),
            ),
            ModelConfig::Dhsv2d {
                sigma1,
                sigma2,
                sigma3,
                rho12,
                rho13,
                rho23,
                v0,
                kappa,
                mu_v,
                h0,
            } => (
                ModelSpec::Dhsv2d(DhsvParams::new(
                    [*sigma1, *sigma2, *sigma3],
                    *rho12,
                    *rho13,
                    *rho23,
                    *v0,
                    *kappa,
                    *mu_v,
                    *h0,
                )?),
                false,
            ),
            ModelConfig::GenericLevy { c, jumps, b } => {
                let d = c.len();
                let jumps = jumps
                    .iter()
                    .map(|j| Jump {
                        size: j.x.clone(),
                        intensity: j.lambda,
                    })
                    .collect();
                let drift = b.clone().unwrap_or_else(|| vec![0.0; d]);
                (ModelSpec::GenericLevy(LevyTriplet::new(drift, c.clone(), jumps)?), b.is_some())
            }
        };
        if given {
            Ok(m)
        } else {
            Ok(m.fix_drift(rate, dividend)?)
        }
    }
}

/// Payoff, tagged by `kind`, with strikes `K`, barriers `B` and asset count `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum PayoffConfig {
    Call {
        #[serde(rename = "K")]
        strike: f64,
    },
    Put {
        #[serde(rename = "K")]
        strike: f64,
    },
    DigitalCall {
        #[serde(rename = "B")]
        barrier: f64,
    },
    DigitalPut {
        #[serde(rename = "B")]
        barrier: f64,
    },
    AssetOrNothingCall {
        #[serde(rename = "B")]
        barrier: f64,
    },
    DoubleDigital {
        #[serde(rename = "B_low")]
        low: f64,
        #[serde(rename = "B_high")]
        high: f64,
    },
    SelfQuantoCall {
        #[serde(rename = "K")]
        strike: f64,
    },
    PowerCall2 {
        #[serde(rename = "K")]
        strike: f64,
    },
    MinCall {
        #[serde(rename = "K")]
        strike: f64,
        #[serde(rename = "d")]
        assets: usize,
    },
    MaxPut {
        #[serde(rename = "K")]
        strike: f64,
        #[serde(rename = "d")]
        assets: usize,
    },
    Product {
        factors: Vec<PayoffConfig>,
    },
}

impl PayoffConfig {
    pub fn build(&self) -> Result<PayoffSpec<f64>, CliError> {
        let p = match self {
            PayoffConfig::Call { strike } => PayoffSpec::Call { strike: *strike },
            PayoffConfig::Put { strike } => PayoffSpec::Put { strike: *strike },
            PayoffConfig::DigitalCall { barrier } => PayoffSpec::DigitalCall { barrier: *barrier },
            PayoffConfig::DigitalPut { barrier } => PayoffSpec::DigitalPut { barrier: *barrier },
            PayoffConfig::AssetOrNothingCall { barrier } => PayoffSpec::AssetOrNothingCall { barrier: *barrier },
            PayoffConfig::DoubleDigital { low, high } => PayoffSpec::DoubleDigital { low: *low, high: *high },
            PayoffConfig::SelfQuantoCall { strike } => PayoffSpec::SelfQuantoCall { strike: *strike },
            PayoffConfig::PowerCall2 { strike } => PayoffSpec::PowerCall2 { strike: *strike },
            PayoffConfig::MinCall { strike, assets } => PayoffSpec::MinCall {
                strike: *strike,
                assets: *assets,
            },
            PayoffConfig::MaxPut { strike, assets } => PayoffSpec::MaxPut {
                strike: *strike,
                assets: *assets,
            },
            PayoffConfig::Product { factors } => {
                PayoffSpec::Product(factors.iter().map(|f| f.build()).collect::<Result<_, _>>()?)
            }
        };
        p.validate()?;
        Ok(p)
    }
}

/// Quadrature settings; absent fields keep the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadOverrides {
    pub tol: Option<f64>,
    pub max_nodes: Option<usize>,
    pub cap_initial: Option<f64>,
    pub cap_max_doublings: Option<usize>,
}

impl QuadOverrides {
    pub fn apply(&self, q: &mut Quad) {
        if let Some(t) = self.tol {
            q.abs_tol = t;
            q.rel_tol = t;
        }
        if let Some(n) = self.max_nodes {
            q.max_nodes = n;
        }
        if let Some(a) = self.cap_initial {
            q.cap_initial = a;
        }
        if let Some(k) = self.cap_max_doublings {
            q.cap_max_doublings = k;
        }
    }

    /// Fields set here win over `base`.
    pub fn merged_over(&self, base: &QuadOverrides) -> QuadOverrides {
        QuadOverrides {
            tol: self.tol.or(base.tol),
            max_nodes: self.max_nodes.or(base.max_nodes),
            cap_initial: self.cap_initial.or(base.cap_initial),
            cap_max_doublings: self.cap_max_doublings.or(base.cap_max_doublings),
        }
    }
}

/// A model given inline or as a path to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Inline(ModelConfig),
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridJob {
    pub model: ModelRef,
    pub payoff: PayoffConfig,
    pub strikes: Vec<f64>,
    pub maturities: Vec<f64>,
    pub spot: Vec<f64>,
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub dividend: f64,
    #[serde(default)]
    pub damping: Option<Vec<f64>>,
    #[serde(default)]
    pub quad: QuadOverrides,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub paths: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl GridJob {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let mut job: GridJob =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let ModelRef::Path(p) = &job.model {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    job.model = ModelRef::Path(dir.join(p));
                }
            }
        }
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |xs: &[f64]| xs.iter().any(|x| !(*x > 0.0 && x.is_finite()));
        if self.strikes.is_empty() || bad(&self.strikes) {
            return Err(CliError::Config("strikes must be a nonempty list of positive numbers".into()));
        }
        if self.maturities.is_empty() || bad(&self.maturities) {
            return Err(CliError::Config("maturities must be a nonempty list of positive numbers".into()));
        }
        if self.maturities.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("maturities must be strictly increasing".into()));
        }
        if self.spot.is_empty() || bad(&self.spot) {
            return Err(CliError::Config("spot must be a nonempty list of positive numbers".into()));
        }
        if !(self.rate >= 0.0 && self.dividend >= 0.0) {
            return Err(CliError::Config("rate and dividend must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn model_config(&self) -> Result<ModelConfig, CliError> {
        match &self.model {
            ModelRef::Inline(m) => Ok(m.clone()),
            ModelRef::Path(p) => load_model(p),
        }
    }

    pub fn mc_config(&self) -> McConfig {
        let mut c = McConfig::default();
        if let Some(p) = self.paths {
            c.paths = p;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        c
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<ModelConfig, CliError> {
    parse_model(&read(path)?)
}

pub fn parse_model(text: &str) -> Result<ModelConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("model: {e}")))
}

pub fn parse_payoff(text: &str) -> Result<PayoffConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("payoff: {e}")))
}

/// Inline JSON when the argument starts with `{`, a file path otherwise.
pub fn json_arg(arg: &str) -> Result<String, CliError> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        read(Path::new(arg))
    }
}
