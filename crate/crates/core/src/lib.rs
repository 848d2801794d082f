//! Link prediction evaluation toolkit.
//!
//! The crate covers the whole evaluation path: loading and preprocessing
//! graphs ([`graph`]), connected train/test edge splits and non-edge
//! sampling ([`split`]), baseline heuristics ([`heuristics`]), node to edge
//! feature operators ([`embed`]), a cross-validated logistic regression
//! ([`classifier`]), metrics and threshold curves ([`metrics`]) and the
//! config-driven evaluator that runs external methods ([`pipeline`]).

pub mod classifier;
pub mod embed;
pub mod generators;
pub mod graph;
pub mod heuristics;
pub mod metrics;
pub mod pipeline;
pub mod seed;
pub mod split;
