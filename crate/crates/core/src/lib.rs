//! Spectral analysis, admissibility checks and ISS certification for diagonal
//! semigroup control systems with semi-uniformly stable dynamics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod cli;
pub mod comparison;
pub mod error;
pub mod iss;
mod num_serde;
pub mod operator;
pub mod scenarios;
pub mod series;
pub mod signal;
pub mod spectral;
pub mod stability;
pub mod trajectory;

pub use error::{Error, Result};
pub use operator::InputOperator;
pub use signal::InputSignal;
pub use spectral::{
    ClosedForm, DiagonalGenerator, EigenvalueModel, RieszBounds, SpectralVector, C64,
};
