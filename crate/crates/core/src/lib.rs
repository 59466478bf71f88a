//! Triangular chart resolutions with bounded derivatives for semi-algebraic
//! sets and Nash functions on the unit interval and square.

pub mod charts;
pub mod engine;
pub mod error;
pub mod kernel;
pub mod semialg;
pub mod verifier;

pub use error::{Error, Result};
