use thiserror::Error;

/// Errors raised by the budget model and its solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A constant lies outside its admissible range.
    #[error("parameter `{name}` = {value} violates {bound}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    /// A closed-form solution was asked for outside the regime it describes.
    #[error("{solution} solution undefined: {reason}")]
    Domain {
        solution: &'static str,
        reason: String,
    },

    /// The operation needs a closed form the expenditure rule does not have.
    #[error("operation requires the quadratic expenditure rule")]
    RequiresQuadratic,

    #[error("integrator state became non-finite after t = {last_good_t}")]
    NonFinite { last_good_t: f64 },

    #[error("invalid sweep: {0}")]
    Sweep(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn check(
    name: &'static str,
    value: f64,
    ok: bool,
    bound: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, value, bound })
    }
}
