//! Numerical toolkit for S-unimodal interval maps.
//!
//! The crate builds the nested sequence of central intervals
//! `U_n = (-u_n, u_n)` of a unimodal map together with first-return times
//! and scaling factors `sigma_n = u_{n+1} / u_n`, decomposes the critical
//! orbit along that cascade, and turns the resulting quantities into
//! summability diagnostics and a parameter classifier for the quadratic
//! family `q_t(x) = -2t x^2 + 2t - 1`.
//!
//! ```
//! use unimodal::maps::UnimodalMap;
//! use unimodal::analysis::summability;
//!
//! let map = UnimodalMap::quadratic(1.0).unwrap();
//! let report = summability(&map, 30).unwrap();
//! assert!((report.partial_sums[29] - (1.0 - 0.5f64.powi(30))).abs() < 1e-9);
//! ```

// `!(a < b)` is used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cascade;
pub mod error;
pub mod geometry;
pub mod maps;
pub mod telemann;

pub use error::{Error, Result};
