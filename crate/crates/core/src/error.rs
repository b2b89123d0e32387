use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV near line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("line {line}: cannot parse {cell:?} as a finite real number")]
    NonNumeric { line: u64, cell: String },

    #[error("line {line}: column {column} is missing")]
    MissingColumn { line: u64, column: String },

    #[error("input contains no data rows")]
    EmptyInput,

    #[error("invalid embedding parameters: {0}")]
    InvalidParams(String),

    #[error(
        "series of length {len} is too short for dimension {dim} and delay {delay}: \
         (dim - 1) * delay must be smaller than the length"
    )]
    EmptyEmbedding { len: usize, dim: usize, delay: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("time index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("vertex {vertex} is not a point of a cloud with {points} points")]
    InvalidVertex { vertex: usize, points: usize },

    #[error("simplex bitmask cannot address {0} vertices (limit is 64)")]
    TooManyVertices(usize),

    #[error("dimension {k} needs more than {n} vertices")]
    DimensionTooLarge { k: usize, n: usize },

    #[error("face {face:?} of simplex {simplex:?} is missing from the codomain basis")]
    MissingFace { simplex: Vec<usize>, face: Vec<usize> },

    #[error("scale order violated: {eps} > {eps_prime}")]
    ScaleOrder { eps: f64, eps_prime: f64 },

    #[error("xi must be a nonzero integer")]
    ZeroXi,

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("invalid scale grid: {0}")]
    InvalidGrid(String),

    #[error("complex at scale {scale} only tracks dimensions up to {tracked}, need {needed}")]
    UntrackedDimension { scale: f64, tracked: usize, needed: usize },

    #[error("inconsistent Betti table: multiplicity {value} at ({i}, {j}) is negative")]
    NegativeMultiplicity { i: usize, j: isize, value: i64 },

    #[error("tables are not comparable: {0}")]
    GridMismatch(String),

    #[error("Betti computation failed at cell ({i}, {j}): {source}")]
    Cell {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
