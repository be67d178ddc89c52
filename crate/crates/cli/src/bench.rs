//! Direct call pricing against the asset-or-nothing minus digital split.

use std::time::Instant;

use fourval::payoffs::{decay_estimate, log_grid, PayoffSpec};
use fourval::pricer::price_strikes;
use fourval::{ModelSpec, PriceRequest};

use crate::CliError;

pub const STRIKES: [f64; 11] = [85.0, 90.0, 92.5, 95.0, 97.5, 100.0, 102.5, 105.0, 107.5, 110.0, 115.0];

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub cells: usize,
    pub direct_nodes: usize,
    pub split_nodes: usize,
    pub direct_seconds: f64,
    pub split_seconds: f64,
    /// Largest `|Call − (AoN − K·Digital)|` over the grid.
    pub max_difference: f64,
    pub call_decay: f64,
    pub aon_decay: f64,
    pub digital_decay: f64,
}

impl DecayReport {
    pub fn split_needs_more_nodes(&self) -> bool {
        self.split_nodes > self.direct_nodes
    }
}

struct Pass {
    prices: Vec<f64>,
    nodes: usize,
}

fn grid(model: &ModelSpec, payoff: PayoffSpec<f64>, maturities: &[f64]) -> Result<Pass, CliError> {
    let mut prices = Vec::new();
    let mut nodes = 0;
    for &t in maturities {
        let req = PriceRequest::new(vec![100.0], payoff.clone(), model.clone(), t);
        let res = price_strikes(&req, &STRIKES, true)?;
        for r in res {
            let r = r?;
            if prices.len() % STRIKES.len() == 0 {
                nodes += r.diagnostics.nodes;
            }
            prices.push(r.value);
        }
    }
    Ok(Pass { prices, nodes })
}

/// Prices 11 strikes by 10 maturities under a Brownian model both ways.
pub fn bench_decay_demo() -> Result<DecayReport, CliError> {
    let model = ModelSpec::brownian(0.0, 0.04)?.fix_drift(0.0, 0.0)?;
    let maturities: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();

    let t0 = Instant::now();
    let direct = grid(&model, PayoffSpec::Call { strike: 100.0 }, &maturities)?;
    let direct_seconds = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let aon = grid(&model, PayoffSpec::AssetOrNothingCall { barrier: 100.0 }, &maturities)?;
    let dig = grid(&model, PayoffSpec::DigitalCall { barrier: 100.0 }, &maturities)?;
    let split_seconds = t0.elapsed().as_secs_f64();

    let mut max_difference: f64 = 0.0;
    for (i, c) in direct.prices.iter().enumerate() {
        let k = STRIKES[i % STRIKES.len()];
        max_difference = max_difference.max((c - (aon.prices[i] - k * dig.prices[i])).abs());
    }
    let u = log_grid(100.0, 1.0e4, 64);
    let decay = |p: PayoffSpec<f64>| -> Result<f64, CliError> {
        let r = p.default_damping()[0];
        Ok(decay_estimate(&p, r, &u)?)
    };
    Ok(DecayReport {
        cells: direct.prices.len(),
        direct_nodes: direct.nodes,
        split_nodes: aon.nodes + dig.nodes,
        direct_seconds,
        split_seconds,
        max_difference,
        call_decay: decay(PayoffSpec::Call { strike: 100.0 })?,
        aon_decay: decay(PayoffSpec::AssetOrNothingCall { barrier: 100.0 })?,
        digital_decay: decay(PayoffSpec::DigitalCall { barrier: 100.0 })?,
    })
}
