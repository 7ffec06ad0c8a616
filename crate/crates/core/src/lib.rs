//! Sup norms of random holomorphic sections of O(n) → CP^m.
//!
//! The crate covers the geometry of CP^m, the Kostlan ensembles, the
//! Szegő kernel, the induced field metric with its covering numbers, the
//! Dudley/Sudakov entropy bounds, and Monte Carlo studies of the sup norm.

pub mod ensemble;
pub mod entropy;
pub mod error;
pub mod field;
pub mod kernel;
mod lowdisc;
pub mod metric;
pub mod projective;
mod quadrature;
pub mod solver;
pub mod study;
mod sympower;

pub use error::{Error, Result};
