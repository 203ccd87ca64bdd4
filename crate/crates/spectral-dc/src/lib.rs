//! Deterministic Hermitian eigensolvers.
//!
//! The central engine is a divide-and-conquer diagonalization of symmetric
//! tridiagonal matrices whose arrowhead merges run on a one-dimensional fast
//! multipole evaluator, paired with a bandwidth-halving reduction of dense or
//! banded Hermitian matrices to tridiagonal form.

pub mod afmm;
pub mod apps;
pub mod arrowhead;
pub mod band;
pub mod dc;
pub mod error;
pub mod flops;
pub mod matrix;
pub mod oracle;
pub mod orthogonal;
pub mod qr;
pub mod scalar;
pub mod tridiagonal;

pub use error::{Error, Result};
pub use flops::OpCounter;
pub use matrix::{matmul, DenseHermitian, Matrix};
pub use scalar::{Scalar, C64};
pub use tridiagonal::SymTridiagonal;
