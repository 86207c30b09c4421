//! Numerical verification of weighted Hardy, Sobolev and Caffarelli–Kohn–Nirenberg
//! type inequalities on the scale of spaces that joins Lebesgue (`1/p > 0`),
//! sup (`1/p = 0`) and Hölder (`1/p < 0`) norms.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod function;
pub mod kfunc;
pub mod lab;
pub mod norm;
pub mod optimize;
pub mod params;
pub mod quadrature;

pub mod cli;

pub use error::{Error, Result};
pub use function::{AnnularDomain, ScalarField, TestFunction};
pub use norm::{NormResult, QuadratureSpec};
pub use params::{CknTuple, InequalityKind, ReciprocalExponent, Regime, SpaceSpec};
