//! Exact-arithmetic computations around equivariant index q-series and
//! truncated Fock-space operator algebra.
//!
//! Everything is computed over exact rationals (or Gaussian rationals on the
//! operator side); there is no floating point anywhere in the crate.

pub mod error;
pub mod roots;
pub mod series;

pub use error::{Error, Result};
