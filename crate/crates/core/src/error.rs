use thiserror::Error;

/// Errors produced by the pinning toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PinError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{what} = {value} outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("no convergence after {iterations} iterations (last iterate {last})")]
    NoConvergence { iterations: usize, last: f64 },

    #[error("series did not reach tolerance {tol} within {k_max} terms (partial sum {partial}, bound {bound})")]
    SeriesTruncation {
        tol: f64,
        k_max: usize,
        partial: f64,
        bound: f64,
    },

    #[error("size {size} exceeds the cap {cap} for {what}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("budget exceeded: {required} work units requested, cap is {cap}")]
    Budget { required: u128, cap: u128 },

    #[error("invalid bracket [{lo}, {hi}]: rule values {f_lo} and {f_hi} do not straddle zero")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("diagnostic: {0}")]
    Diagnostic(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for PinError {
    fn from(e: std::io::Error) -> Self {
        PinError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PinError>;
