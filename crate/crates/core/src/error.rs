use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angular momentum: {0}")]
    InvalidAngularMomentum(String),

    #[error("basis capacity exceeded: {size} states > limit {limit}")]
    Capacity { size: usize, limit: usize },

    #[error("state left the target sector: {0}")]
    OutOfSector(String),

    #[error("photon cap overflow: mode {mode} would hold {requested} > cap {cap}")]
    CapOverflow {
        mode: String,
        requested: u32,
        cap: u32,
    },

    #[error("mode {0} is not part of the mode space")]
    UnknownMode(String),

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("chain mismatch: {0}")]
    ChainMismatch(String),

    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("constructed state vanishes: {0}")]
    ZeroState(String),

    #[error("coherent-state truncation too small: tail mass {tail_mass:.3e} > {limit:.1e}")]
    TruncationTooSmall { tail_mass: f64, limit: f64 },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("zero vector has no darkness residual")]
    ZeroVector,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
