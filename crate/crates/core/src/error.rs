use thiserror::Error;

use crate::prop_graph::GenSym;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("permutation length {got} does not match arity {expected}")]
    PermLength { expected: usize, got: usize },

    #[error("invalid permutation: {0}")]
    InvalidPerm(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("graph contains a directed cycle")]
    Cycle,

    #[error("forbidden biarity ({0},{1})")]
    ForbiddenBiarity(usize, usize),

    #[error("invalid generator ({0},{1})")]
    InvalidGenerator(usize, usize),

    #[error("table entry {gen}: {msg}")]
    Table { gen: GenSym, msg: String },

    #[error("no table entry for {0}")]
    MissingEntry(GenSym),

    #[error("not computable: {0}")]
    NotComputable(String),

    #[error("candidate is not homogeneous of degree 1")]
    NotDegreeOne,
}

pub type Result<T> = std::result::Result<T, Error>;
