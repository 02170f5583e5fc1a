//! Matrix-valued Hermite-type orthogonal polynomials in exact arithmetic:
//! weights, four constructions of the monic polynomials, ladder and
//! differential operators, the raising-operator calculus, the Toda
//! deformation, quadrature, and named verification suites.

pub mod burchnall;
pub mod check;
pub mod diffops;
pub mod error;
pub mod exact;
pub mod hermite;
pub mod matpoly;
pub mod mvops;
pub mod quad;
pub mod suites;
pub mod toda;
pub mod weight;

pub use error::{Error, Result};
