use thiserror::Error;

/// Structural problems in lattices, cell complexes and triangulations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("invalid complex: {0}")]
    Invalid(String),
    #[error("gluing of cell {cell} across facet slot {slot} is not involutive")]
    NotInvolutive { cell: usize, slot: usize },
    #[error("face class of cell {cell} face {face} is identified with itself by a nontrivial map")]
    Holonomy { cell: usize, face: usize },
    #[error("facet {facet} of simplex {simplex} is matched {count} times")]
    NotPseudomanifold {
        simplex: usize,
        facet: usize,
        count: usize,
    },
}

/// Malformed text input, reported with its line number (1-based).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Verification(String),
    #[error("no coloring satisfies the constraints")]
    NoColoring,
    #[error("expected an ideal vertex, got {0}")]
    NotIdeal(String),
    #[error("face of rank {0} has no quotient complex (ranks 1..4 only)")]
    BadFaceRank(usize),
    #[error("the complex has non-identity gluings, so faces do not project to the polytope")]
    NotProjecting,
    #[error("empty complex")]
    EmptyComplex,
    #[error("table row {row}: {message}")]
    Table { row: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
