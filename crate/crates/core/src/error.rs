use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A quantity outside the interval the model supports.
    #[error("{what} = {value} is outside the supported range [{min}, {max}]")]
    Range {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// An input for which the requested quantity is undefined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operating point lies outside the region where output power is positive.
    #[error("source power {ps} W is infeasible; output power is positive only for P_s in ({min} W, +inf)")]
    Infeasible { ps: f64, min: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("fit did not converge after {iterations} iterations (best mse {best_mse})")]
    NoConvergence { iterations: usize, best_mse: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("calibration failed: target not bracketed by area factor [{lo}, {hi}] (powers {p_lo} W .. {p_hi} W)")]
    Calibration { lo: f64, hi: f64, p_lo: f64, p_hi: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Fit(_) | Error::NoConvergence { .. } | Error::Model(_) | Error::Calibration { .. }
        )
    }
}
