//! Attribution-based auditing of synthetic tabular data.
//!
//! Two gradient-boosted classifiers are trained, one on the real table and one
//! on the synthetic table. Both are explained with exact path-dependent
//! TreeSHAP on the same real holdout rows, and the cosine distance between the
//! two global attribution vectors is reported next to marginal KL divergence,
//! PCA variance ratios and moment gaps.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the `shapaudit` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod attribution;
pub mod dataset;
pub mod digest;
mod error;
pub mod linalg;
pub mod math;
pub mod metrics;
pub mod model;
pub mod refine;
pub mod seed;

pub use error::{Error, Result};
