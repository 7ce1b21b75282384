use thiserror::Error;

/// Errors raised by the model kernels, engines and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DpmError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("allocation weight {0} is outside [0, 1]")]
    InvalidWeight(f64),
    #[error("observation contains a non-finite value")]
    NonFiniteObservation,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cluster counts total {found} but step {step} requires {expected}")]
    InconsistentCounts {
        step: usize,
        expected: f64,
        found: f64,
    },
    #[error("{clusters} occupied clusters exceed truncation level {trunc}")]
    TruncationExceeded { trunc: usize, clusters: usize },
    #[error("scale matrix lost positive definiteness")]
    NotPositiveDefinite,
    #[error("every candidate predictive density underflowed")]
    NumericUnderflow,
    #[error("predictive density evaluated to a non-finite value")]
    NonFinitePredictive,
    #[error("enumeration over {n} observations exceeds the cap of {cap}")]
    EnumerationTooLarge { n: usize, cap: usize },
    #[error("dataset is empty")]
    EmptyData,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("reference density is identically zero at the evaluation points")]
    DegenerateReference,
}

pub type Result<T> = std::result::Result<T, DpmError>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        Err(DpmError::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    } else if value <= 0.0 {
        Err(DpmError::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        })
    } else {
        Ok(value)
    }
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(DpmError::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
