//! Transformations of Laplace exponents of spectrally negative Lévy
//! processes and subordinators, with their scale functions, exponential
//! functionals, and positive self-similar Markov processes.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod expfunctional;
pub mod exponent;
pub mod montecarlo;
pub mod pssmp;
pub mod quad;
pub mod report;
pub mod schema;
pub mod scale;
pub mod specfun;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use exponent::{Family, LaplaceExponent, LevyTriple};
