//! Bounded-memory butterfly counting over fully dynamic bipartite graph
//! streams.
//!
//! A butterfly is a complete 2x2 biclique. The estimator keeps a uniform
//! bounded sample of the live edge set, counts per arriving edge the
//! butterflies it closes inside the sample, and scales each discovery by the
//! reciprocal of its sampling probability. The result is unbiased for any
//! mix of insertions and deletions and degrades gracefully as the budget
//! shrinks. A mini-batch variant parallelizes the counting step while
//! reproducing the sequential estimate bit for bit.
//!
//! Start with the `examples/` directory: each example exercises one major
//! capability end to end.

pub mod error;
pub mod estimator;
pub mod harness;
pub mod oracle;
pub mod parallel;
pub mod sample;
pub mod stream;

pub use error::{Error, Result};
