//! Numerical laboratory for sample-complexity lower bounds on estimating
//! entries of a Gaussian precision matrix.
//!
//! The modules mirror the objects involved: dense symmetric linear algebra
//! ([`matcore`]), seeded sampling ([`sampler`]), conditional correlations and
//! ellipse sections ([`conditional`]), Wishart laws ([`wishart`]), total
//! variation bounds ([`tvlab`]) and the rank-detection games ([`detection`]).

pub mod conditional;
pub mod detection;
pub mod error;
pub mod matcore;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod tvlab;
pub mod wishart;

pub use error::{Error, Result};
