//! Numerical laboratory for mean values of the Riemann zeta function in the
//! critical strip `1/2 < σ < 1`.

pub mod approximants;
pub mod arith;
pub mod constants;
pub mod error;
pub mod meanvalue;
pub mod stats;
pub mod zeros;
pub mod zeta_eval;

pub use error::{Error, Result};
