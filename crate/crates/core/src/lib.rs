//! Prices of European options on one to three assets by Fourier inversion of
//! the damped payoff against the extended moment generating function of the
//! driving process, with a Monte-Carlo oracle for cross-checks.
//!
//! The numerical core is generic over `f32`/`f64`; the aliases below fix `f64`.

pub mod error;
mod linalg;
pub mod mc;
pub mod models;
pub mod payoffs;
pub mod pricer;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use mc::{McConfig, McEstimate};
pub use models::MomentStrip;
pub use payoffs::{PayoffStrip, Regularity};
pub use pricer::{Mode, PriceRequest, PriceResult};
pub use quadrature::{CapResult, CapWindow, QuadConfig};
pub use scalar::Real;

pub type ModelSpec = models::ModelSpec<f64>;
pub type PayoffSpec = payoffs::PayoffSpec<f64>;
pub type Request = pricer::PriceRequest<f64>;
pub type Priced = pricer::PriceResult<f64>;
pub type Quad = quadrature::QuadConfig<f64>;
pub type Caps = quadrature::CapResult<f64>;
