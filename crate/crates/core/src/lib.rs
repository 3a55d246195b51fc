//! Finite-dimensional toolkit for von Neumann algebras generated by spectral
//! measures.
//!
//! Every Hilbert space here is `C^n`, every sample space is a finite set of
//! atoms, and every von Neumann algebra is represented by a Hilbert–Schmidt
//! orthonormal basis of its linear span. Closures and domain questions
//! disappear in this setting, and an operator affiliated with an algebra is
//! simply a member of it.

pub mod error;
pub mod numkernel;
pub mod spectral;
pub mod algebra;
pub mod generators;
pub mod harness;

pub use error::{Error, Result};
pub use numkernel::{ComplexMatrix, Tolerances, C64};
