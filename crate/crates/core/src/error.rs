use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{what} = {value} is outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("Bessel order {order} is not supported (maximum {max})")]
    UnsupportedOrder { order: i32, max: u32 },

    /// Adaptive quadrature ran out of budget. `value` is the best estimate.
    #[error("quadrature did not converge: value {value:e}, error estimate {error_estimate:e} after {evaluations} evaluations")]
    Convergence {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Quadrature failed at one drive velocity of a scan.
    #[error("scan point v/c = {velocity}: {source}")]
    ScanPoint {
        velocity: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate scan curve: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            expected,
        }
    }
}
