//! Numerics for discrete Hardy spaces `H^p(Z^n)`.
//!
//! The crate evaluates the discrete Poisson and Riesz kernels, the discrete
//! Riesz transforms `R_s^d` and the discrete Riesz potential `I_α` on finite
//! windows, computes `ℓ^p` and `H^p` quasi-norms, builds atoms and molecules
//! with exactly vanishing moments, and runs verification suites that check
//! the quantitative inequalities of the theory with certified truncation
//! bounds.
//!
//! Everything operates on [`GridFunction`]s: finitely supported sequences
//! stored densely on an axis-aligned [`Window`].

pub mod atoms;
pub mod error;
pub mod hardy;
pub mod kernels;
pub mod lattice;
pub mod operators;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{CertifiedValue, DiscreteCube, ExponentConfig, GridFunction, LatticePoint, Window};
pub use operators::Backend;
