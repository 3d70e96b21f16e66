use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("state {i} is outside [0, {n}]")]
    StateOutOfRange { i: usize, n: usize },

    #[error("closed-form analytics require the frozen phase")]
    NotFrozen,

    #[error("alpha = {alpha} is not supercritical (requires alpha > 2d = {two_d})")]
    NotSupercritical { alpha: f64, two_d: usize },

    #[error("submartingale set has {} runs, at most two expected: {runs:?}", runs.len())]
    MoreThanTwoIntervals { runs: Vec<(usize, usize)> },

    #[error("no state has a nonnegative aggregate drift")]
    EmptySubmartingaleSet,

    #[error("zero transition probability at state {i}; chain is not irreducible")]
    ZeroTransition { i: usize },

    #[error("found {found} crossings, at least 2 are needed")]
    InsufficientCrossings { found: usize },

    #[error("have {found} samples, at least {required} are needed")]
    InsufficientSamples { found: usize, required: usize },

    #[error("tail grid has {points} usable points, at least 4 are needed")]
    DegenerateGrid { points: usize },

    #[error("path is not dense: epoch {found} follows epoch {previous}")]
    NonContiguousPath { previous: u64, found: u64 },

    #[error("least-squares solve failed: {0}")]
    Numerical(String),
}
