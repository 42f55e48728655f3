use thiserror::Error;

/// Errors surfaced by the simulation and estimation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A thinning or Bernoulli probability outside `[0, 1]` (or NaN).
    #[error("probability {value} is outside [0, 1]")]
    InvalidProbability { value: f64 },

    /// An innovation law parameter outside its admissible range.
    #[error("invalid innovation parameter {name} = {value}: {reason}")]
    InvalidInnovation {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The simulator requires innovations with strictly positive mean.
    #[error("innovation law has mean zero; simulation requires a positive drift")]
    ZeroMeanInnovation,

    /// An autoregressive coefficient outside `[0, 1]` (or NaN).
    #[error("coefficient {name} = {value} is outside [0, 1]")]
    InvalidCoefficient { name: &'static str, value: f64 },

    /// A simulated count exceeded the 64-bit range.
    #[error("simulated count overflowed 64 bits at step {k}")]
    CountOverflow { k: usize },

    /// An exact integer accumulator left the range where downstream
    /// products stay representable.
    #[error("normal equation accumulator overflow on a path of length {n}")]
    AccumulatorOverflow { n: usize },

    /// Exactly proportional regressors: the normal equations are singular
    /// even though the lag-2 regressor is not identically zero, so the
    /// least squares minimizer is not unique.
    #[error("regressors are exactly collinear (lag-2 sum of squares {s22} > 0, determinant 0)")]
    CollinearRegressors { s22: i128 },

    /// Scaled estimation errors are only defined for full-rank estimates.
    #[error("operation requires a full-rank estimate, got branch {branch}")]
    NotFullRank { branch: &'static str },

    /// A statistic was requested on an empty sample.
    #[error("empty sample")]
    EmptySample,

    /// A configuration value violated a documented bound.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A Monte Carlo replication failed; the index is attached.
    #[error("replication {rep} failed: {source}")]
    Replication {
        rep: usize,
        #[source]
        source: Box<Error>,
    },

    /// Malformed textual input (innovation grammar, path files, ...).
    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
