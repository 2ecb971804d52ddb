use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),
    #[error("duplicate tuple id `{0}`")]
    DuplicateTupleId(String),
    #[error("tuple `{id}` has {found} values but the dataset has {expected} attributes")]
    Arity {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("no embedding for tuple id `{0}`")]
    MissingEmbedding(String),
    #[error("embedding contains a non-finite value")]
    NonFinite,
    #[error("tuple index {index} out of range for a dataset of {len} tuples")]
    UnknownTuple { index: usize, len: usize },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{0}` is mapped more than once")]
    DuplicateMapping(String),
    #[error("{stage}: loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { stage: &'static str, epoch: usize },
    #[error("no labeled pairs to train on")]
    NoLabels,
    #[error("too few candidates to split: {0} (need at least 5)")]
    TooFewCandidates(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible synthetic spec: {0}")]
    Infeasible(String),
}
