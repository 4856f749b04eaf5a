use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("particle {id}: {reason}")]
    InvalidParticle { id: u64, reason: &'static str },

    #[error("particle {id} lies outside its cell")]
    OutsideCell { id: u64 },

    #[error("cell edge {edge} is smaller than the largest cut-off {h_max}")]
    CellTooSmall { edge: f64, h_max: f64 },

    #[error("cell holds {count} particles, cache capacity is {capacity}")]
    CacheCapacity { count: usize, capacity: usize },

    #[error("unsupported lane width {0} (expected 1, 4, 8 or 16)")]
    LaneWidth(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("weighted total needs at least one {0} result")]
    MissingKind(&'static str),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
