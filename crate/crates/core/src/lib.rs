//! Numerical toolkit for biharmonic maps between statistical manifolds.
//!
//! Coordinates are charts `U ⊂ ℝⁿ`; every geometric quantity is computed from
//! exact truncated Taylor jets of the model's coefficient functions.

pub mod catalog;
pub mod error;
pub mod jets;
pub mod manifold;
pub mod maps;
pub mod variation;

pub use error::{Error, Result};
