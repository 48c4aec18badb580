use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseWordError {
    #[error("empty word")]
    Empty,
    #[error("entry {index} is zero; twist parameters must be nonzero")]
    ZeroEntry { index: usize },
    #[error("word has odd length {0}; an even number of twist regions is required")]
    OddLength(usize),
    #[error("cannot parse `{0}` as an integer")]
    BadToken(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("n = {0} is below the minimum complexity 2")]
    ComplexityTooSmall(u64),
    #[error("n = {n} exceeds the enumeration cap {cap}")]
    EnumerationCap { n: u64, cap: u64 },
    #[error("average genus ratio {ratio} at n = {n} is below 1/4")]
    RatioBelowQuarter { n: u64, ratio: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("bound parameters must be positive (k = {k}, s = {s})")]
    InvalidParams { k: u64, s: u64 },
    #[error("replay failed at step {step}: {reason}")]
    Replay { step: usize, reason: String },
    #[error("trace line {line}: {reason}")]
    TraceParse { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("n = {0} is below the minimum complexity 2")]
    ComplexityTooSmall(u64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("n grid must be strictly ascending with at least two entries")]
    InvalidGrid,
    #[error("(2k)^(2s) does not fit in 64 bits")]
    TooManyTypes,
    #[error(transparent)]
    Engine(#[from] EngineError),
}
