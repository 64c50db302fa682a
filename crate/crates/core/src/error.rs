use thiserror::Error;

/// Errors raised while constructing model values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("levels and masses differ in length ({levels} vs {masses})")]
    LengthMismatch { levels: usize, masses: usize },
    #[error("population needs at least one level")]
    EmptyPopulation,
    #[error("level {0} is outside [0, 1]")]
    LevelOutOfRange(String),
    #[error("levels must be strictly increasing (at position {0})")]
    UnsortedLevels(usize),
    #[error("mass {0} must be positive and finite")]
    NonPositiveMass(String),
    #[error("index endpoint {0} is outside [0, 1]")]
    IndexOutOfRange(String),
    #[error("productivity level {0} is not part of the population")]
    UnknownLevel(String),
    #[error("level {0} listed twice")]
    DuplicateLevel(String),
    #[error("wage {0} must be non-negative and finite")]
    InvalidWage(String),
    #[error("expected {expected} level slots, found {found}")]
    SlotCount { expected: usize, found: usize },
    #[error("offer menu is not monotone at level {0}")]
    NonMonotoneMenu(String),
    #[error("tie share theta must lie in [0, 1], got {0}")]
    InvalidTheta(String),
}
