//! Exact and numeric kernels for a Fock-type model of the loop group of `SL_n`
//! and the affine Lie algebra `sl_n^`, acting on Schwartz functions over `R^n((t))`.

pub mod action;
pub mod affine;
pub mod dvr;
pub mod error;
pub mod functionals;
pub mod hecke;
pub mod fock;
pub mod matrix;
pub mod quadrature;
pub mod rational;
pub mod samples;
pub mod semigroup;
pub mod series;
pub mod suites;
pub mod tables;

pub use error::{Error, Result};
pub use matrix::{LoopMatrix, LoopVector};
pub use rational::Q;
pub use series::TruncatedSeries;
