//! Exact arithmetic: polynomials, rational functions, modular images and kernels.

pub mod lift;
pub mod matrix;
pub mod modular;
pub mod polynomial;
pub mod rational;

pub use matrix::{assemble_columns, first_dependency, nullspace_bounded, Assembled, Dependency, PolyMatrix};
pub use polynomial::{binomial, exps_degree, grlex_cmp, q_frac, q_int, Exps, Polynomial, Vars, Q};
pub use rational::{Factors, MonomialMap, RationalFunction};
