use alloc::string::String;

/// Errors produced by the environments and graders.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    MismatchedDimensions { expected: usize, found: usize },
    #[error("overlap window is empty")]
    EmptyWindow,
    #[error("episode already ran all {0} iterations")]
    EpisodeFinished(u32),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("could not build a task whose candidates have a unique best score")]
    DegenerateTask,
    #[error("unknown reference: {0}")]
    UnknownReference(String),
    #[error("no feasible assignment exists")]
    Unsatisfiable,
    #[error("search space of {space} assignments exceeds the brute-force guard")]
    TooLarge { space: u128 },
    #[error("instance generation gave up after {0} rejected draws")]
    GenerationExhausted(u32),
    #[error("k = {k} is outside 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("cannot aggregate an empty set")]
    EmptySet,
    #[error("invalid time slot: {0}")]
    InvalidSlot(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
