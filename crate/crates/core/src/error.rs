use thiserror::Error;

/// Errors produced by the clustering engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented constraints.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Input data violates a structural requirement (non-finite values,
    /// zero-norm rows under the cosine metric, asymmetric distance stores).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A requested row window does not fit inside the dataset.
    #[error("row window [{offset}, {offset}+{m}) out of range for {n} rows")]
    WindowOutOfRange { offset: usize, m: usize, n: usize },

    /// The data admits no meaningful answer (e.g. every sampled pairwise
    /// distance is zero, so no cutoff distance can be estimated).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A guarded operation refused to run (e.g. the quadratic reference
    /// implementation on an input too large to materialize).
    #[error("refused: {0}")]
    Refused(String),

    /// A worker aborted the run; the failing window is identified.
    #[error("worker {worker} failed on window [{offset}, {offset}+{m}): {message}")]
    WorkerFailed {
        worker: usize,
        offset: usize,
        m: usize,
        message: String,
    },

    /// An internal invariant was violated; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
