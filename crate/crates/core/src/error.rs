use thiserror::Error;

use crate::simulation::SimulatedSequence;

pub type Result<T> = std::result::Result<T, HawkesError>;

#[derive(Debug, Error)]
pub enum HawkesError {
    /// A model parameter lies outside its admissible domain.
    #[error("parameter `{name}` = {value} out of domain: {requirement}")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// A call-site argument is invalid (reversed bounds, negative lag, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The mark moment E[m^beta] does not exist for the configured mark law.
    #[error("mark moment diverges: beta = {beta} must be below mark exponent - 1 = {bound}")]
    DivergentMarkMoment { beta: f64, bound: f64 },

    #[error("supercritical regime: branching factor {n_star} >= 1")]
    Supercritical { n_star: f64 },

    /// The operation expects an unmarked kernel but got a marked one, or vice versa.
    #[error("kernel contract violated: {0}")]
    KernelContract(String),

    /// Simulation could not make progress; the partial sequence is preserved.
    #[error("simulation stalled after {} events ({reason})", partial.events.len())]
    Stalled {
        partial: Box<SimulatedSequence>,
        reason: String,
    },

    #[error("line {line}: {message}")]
    Format { line: u64, message: String },

    #[error("row {row} (line {line}): {message}")]
    Validation { row: u64, line: u64, message: String },

    #[error("cascade is empty: it must contain at least its initial event")]
    EmptyCascade,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HawkesError {
    pub(crate) fn domain(name: &'static str, value: f64, requirement: &'static str) -> Self {
        HawkesError::ParameterDomain {
            name,
            value,
            requirement,
        }
    }
}

/// Checks `value > 0` and finite.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(HawkesError::domain(name, value, "must be finite and > 0"))
    }
}

/// Checks `value >= 0` and finite.
pub(crate) fn nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(HawkesError::domain(name, value, "must be finite and >= 0"))
    }
}
