//! Three-date model of a bank that originates, securitizes, hedges and
//! trades credit in a market moved by noise-trader sentiment.

pub mod bank;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod instruments;
pub mod market;
pub mod output;
pub mod presets;
pub mod strategy;

pub use error::{ConfigError, ModelError, ModelResult};
