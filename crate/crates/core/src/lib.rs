//! Calculus of linear relations (multivalued operators) between
//! finite-dimensional Hilbert spaces.
//!
//! A relation from `H = F^m` to `K = F^n` is a subspace of `H × K`, stored as
//! an orthonormal basis of stacked vectors `(f, f′)`. On top of the subspace
//! layer the crate provides the relation algebra (adjoint, inverse, sums,
//! products), the canonical decomposition `T = T_reg + T_sing`, Stone
//! characteristic matrices and the graph-norm variational identities.

pub mod cli;
pub mod decomposition;
pub mod error;
pub mod fixtures;
pub mod gallery;
pub mod linalg;
pub mod metric;
pub mod random;
pub mod relation;
pub mod relspec;
pub mod report;
pub mod scalar;
pub mod stone;
pub mod subspace;
pub mod tolerance;
pub mod verify;

pub use decomposition::{Classification, Decomposition};
pub use error::{RelError, Result};
pub use relation::{LinearRelation, Parts};
pub use scalar::{Field, Scalar};
pub use stone::CharacteristicMatrix;
pub use subspace::{RankProfile, Subspace};
pub use tolerance::ToleranceConfig;
