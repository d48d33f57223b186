use thiserror::Error;

/// Failures raised by the pricing, market and balance-sheet primitives.
///
/// Inside a simulated path these are not process failures: the engine
/// records them as flagged outcomes on the path result.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("origination fee {fee} is not below the project cost of 1")]
    FeeTooLarge { fee: f64 },
    #[error("price is zero; demand is undefined")]
    ZeroPrice,
    #[error("cleared price {price} would be negative")]
    NegativePrice { price: f64 },
    #[error("collateral price {price} is below 1 - h = {floor}; equity is exhausted")]
    FullWipeout { price: f64, floor: f64 },
    #[error("losses exceed equity: terminal equity {equity}")]
    InsolventBank { equity: f64 },
    #[error("CDS spread is zero; naked protection cannot be sized")]
    ZeroSpread,
}

pub type ModelResult<T> = Result<T, ModelError>;

/// Configuration parsing and validation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value for `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl From<ModelError> for ConfigError {
    fn from(err: ModelError) -> Self {
        ConfigError::Validation(err.to_string())
    }
}
