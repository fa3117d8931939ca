//! Coverage, outage and cell-capacity statistics of Poisson cellular networks
//! with arbitrary fading, analytic and by Monte Carlo.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod capacity;
pub mod channel;
pub mod error;
pub mod intensity;
pub mod numerics;
pub mod simulator;

pub use error::{Error, Result};
