use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("forms live on different universes ({0} vs {1})")]
    UniverseMismatch(usize, usize),
    #[error("index {index} outside universe of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("universe size {0} exceeds the 64-slot bitmask capacity")]
    UniverseTooLarge(usize),
    #[error("invalid norm exponent p = {0} (need p >= 1)")]
    InvalidExponent(f64),
    #[error("expected a one-form, found a term of degree {0}")]
    NotOneForm(usize),
    #[error("empty degree list")]
    EmptyDegrees,
    #[error("matrix is not skew-symmetric (deviation {0:e})")]
    NotSkew(f64),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("dimension {dim} exceeds the limit {limit} for {what}")]
    TooLarge { what: &'static str, dim: usize, limit: usize },
    #[error("generator sets differ")]
    GeneratorMismatch,
    #[error("polynomial has a nonzero degree-0 part")]
    ConstantPart,
    #[error("odd two-body potential: v({site}) != v(-{site})")]
    OddPotential { site: usize },
    #[error("kernel arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("vertex {0} is not a vertex of the tree")]
    InvalidVertex(usize),
    #[error("number of vertices {0} outside supported range {1}..={2}")]
    VertexCountOutOfRange(usize, usize, usize),
    #[error("total external momentum is nonzero; no conserving line momenta exist")]
    NoMomentumSolution,
    #[error("interpolation parameter {0} outside [0,1]")]
    InterpolationOutOfRange(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("caterpillar needs m >= 1")]
    CaterpillarSize,
    #[error("malformed amplitude problem: {0}")]
    Problem(String),
    #[error("enumeration too large: {0}")]
    EnumerationCap(String),
    #[error("rank-one decomposition required: {0}")]
    NotRankOne(String),
    #[error("covariance support touches the fundamental-domain boundary at momentum index {0}")]
    SupportAtBoundary(usize),
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),
    #[error("invalid scale model: {0}")]
    ScaleModel(String),
    #[error("lattice too coarse on axis {axis}: have {have} points, need at least {need}")]
    Resolution { axis: usize, have: usize, need: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("negative or non-integer loop count: {0}")]
    LoopCount(String),
    #[error("effective norm {0} >= 1, output bound undefined")]
    NormTooLarge(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io/format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
