//! Exact divisor theory on metric graphs.
//!
//! * [`graph`]: metric graph models, points, subdivision, cycle bases;
//! * [`divisor`], [`function`]: divisors and piecewise-linear functions with `div(F)`;
//! * [`jacobian`]: period matrices, Abel-Jacobi map, principal divisors and lifting;
//! * [`discrete`]: Jacobians of unit-length graphs via Smith normal form;
//! * [`embedding`]: certified isometric embeddings into `Q^3` and their balancing;
//! * [`cli`]: the `tropjac` command-line tool.
//!
//! All arithmetic is exact over arbitrary-precision rationals.

pub mod cli;
pub mod discrete;
pub mod divisor;
pub mod embedding;
pub mod error;
pub mod function;
pub mod graph;
pub mod jacobian;
pub mod linalg;
pub mod rational;

pub use divisor::Divisor;
pub use error::{Error, Result};
pub use function::{divisor_of, is_integer_sloped, PlFunction};
pub use graph::{homology_basis, simple_loopless_model, subdivide, CycleBasis, GraphPoint, MetricGraph};
pub use rational::Q;
