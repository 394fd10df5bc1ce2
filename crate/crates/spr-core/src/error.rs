//! Error type shared by every module in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two distinct location pairs map to the same difference within
    /// tolerance, so the difference set no longer determines the support.
    #[error("difference collision: {0}")]
    Collision(String),

    /// Input is numerically degenerate (rank-deficient or ill-conditioned
    /// beyond tolerance) and the result would be meaningless.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An autocorrelation atom could not be matched to any pairwise
    /// difference of the candidate support within tolerance.
    #[error("atom labeling failed: {0}")]
    LabelingFailure(String),

    /// A value lies outside the mathematical domain of the operation
    /// (e.g. logarithm of a nonpositive weight).
    #[error("domain error: {0}")]
    Domain(String),

    /// Measurements contradict each other (no consistent solution exists).
    #[error("inconsistent measurement: {0}")]
    InconsistentMeasurement(String),

    /// An otherwise-valid computation produced output too degenerate to
    /// return (e.g. fewer nonzero grid cells than requested peaks).
    #[error("degenerate output: {0}")]
    DegenerateOutput(String),
}
