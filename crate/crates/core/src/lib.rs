//! Thermodynamic formalism for affine iterated function systems.
//!
//! The crate evaluates singular-value potentials on words over a finite
//! alphabet, estimates subadditive pressure from exact level sums, solves for
//! affinity and Lyapunov dimensions by bisection, and builds level-`n` Gibbs
//! approximations of equilibrium states. It also carries the numerical
//! witnesses used to study tuples of the form `A_i = B_i ⊗ B_ι(i)`, which can
//! be strongly irreducible while still having two distinct ergodic
//! equilibrium states.
//!
//! Level sums are evaluated by walking the product tree with carried prefix
//! products. With the default `parallel` feature the walk is split by fixed
//! prefixes across a rayon pool; the reduction shape does not depend on the
//! number of workers, so results are bit-identical with or without it.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod ifs;
pub mod irreducibility;
pub mod linalg;
pub mod potentials;
pub mod pressure;
pub mod words;

pub use error::{Error, Result};
pub use exec::Exec;
pub use linalg::{EigenModuli, Matrix, SingularSpectrum};
pub use potentials::{DualizedSystem, Potential};
pub use pressure::{DimensionResult, PressureEstimate};
pub use words::{Budget, MatrixTuple, SymbolPermutation, Word};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
