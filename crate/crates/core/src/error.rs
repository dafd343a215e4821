use thiserror::Error;

/// Errors raised by graph construction, the CI engine and the samplers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("graph contains a directed cycle")]
    Cycle,
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("node {node} out of range for a graph on {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("overlapping index sets: {0}")]
    IndexOverlap(String),
    #[error("{what}: size {size} exceeds the supported maximum {max}")]
    TooLarge {
        what: &'static str,
        size: usize,
        max: usize,
    },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("not a permutation: {0}")]
    NotPermutation(String),
    #[error("embedding is not injective: {0}")]
    NotInjective(String),
    #[error("underlying undirected graph is not a forest")]
    NotForest,
    #[error("singular pivot")]
    SingularPivot,
    #[error("sampler gave up after {attempts} rejected draws (modulus too small?)")]
    ResampleExhausted { attempts: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("randomized and oracle classification disagree: {0}")]
    CrossCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
