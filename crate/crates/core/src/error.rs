use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} outside of the tabulated range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("non-finite or invalid coefficient value {value} for {what}")]
    Evaluation { what: String, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: partial result {partial}, error estimate {estimate}")]
    Quadrature { partial: f64, estimate: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (last update {last_update:e})")]
    NonConvergence {
        iterations: usize,
        last_update: f64,
        ratios: Vec<f64>,
    },

    #[error("hypothesis {tag} violated during iteration: {detail}")]
    Hypothesis { tag: String, detail: String },

    #[error("contraction window: {0}")]
    Window(String),

    #[error("no sign change of the interface function over {} scan points", values.len())]
    NoRoot { values: Vec<(f64, f64)> },

    #[error("inner solve failed at xi = {xi}: {source}")]
    AtXi {
        xi: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("shooting oracle failed: {0}")]
    Oracle(String),

    #[error("config error in {field}{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        field: String,
        line: Option<usize>,
        message: String,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
