//! Annihilating operators for diagonals of D-finite power series.

pub mod algebra;
pub mod bounds;
pub mod cli;
pub mod dfinite;
pub mod error;
pub mod gessel;
pub mod lipshitz;
pub mod series;
pub mod weyl;

pub use error::{Error, Result};
