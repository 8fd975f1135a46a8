//! Exact computations with the minimal model of bialgebras: graphs, fractions,
//! the differential table, tensor evaluation, the deformation complex and its
//! L∞ brackets.

pub mod diff_table;
pub mod endo_eval;
pub mod error;
pub mod exact_tensor;
pub mod fraction_calc;
pub mod gs_complex;
pub mod linf_core;
pub mod prop_graph;
pub mod random;

pub use error::{Error, Result};
pub use exact_tensor::{MultiTensor, Perm, Rational};
pub use prop_graph::{DecoratedGraph, FormalSum, GenSym, Graph};
