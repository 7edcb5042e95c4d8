use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register name collision: {0}")]
    NameCollision(String),

    #[error("unknown register: {0}")]
    UnknownRegister(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("not a permutation of the system registers: {0}")]
    NotAPermutation(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("not unitary: deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("overlapping subsystems: {0}")]
    Overlap(String),

    #[error("protocol failed validation: {}", .0.join("; "))]
    InvalidProtocol(Vec<String>),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("size guard: {what} would need {size} entries (limit {limit})")]
    TooLarge {
        what: String,
        size: u128,
        limit: u128,
    },
}
