//! Alternative feature selection for tabular binary classification.
//!
//! Given per-feature quality scores (or a black-box set evaluator), this
//! crate searches for several feature sets that are all of high quality yet
//! pairwise dissimilar under a Dice or Jaccard threshold. It provides:
//!
//! - exact sequential and simultaneous search via depth-first branch-and-bound
//!   over binary selection vectors ([`solver`]),
//! - polynomial-time greedy searches for the univariate objective
//!   ([`heuristics`]),
//! - solver-assisted hill climbing for black-box set quality ([`wrapper`]),
//! - dataset ingestion, feature-quality estimation, a small decision-tree
//!   classifier, and a cross-validated experiment harness.
//!
//! With the default `parallel` feature, per-column quality computations and
//! experiment-grid cells run on a rayon pool; builds without it fall back to
//! sequential loops with identical results.

pub mod altset;
pub mod data;
pub mod error;
pub mod harness;
pub mod heuristics;
pub mod predict;
pub mod quality;
pub mod solver;
pub mod wrapper;

pub use error::{Error, Result};
