//! Multi-objective probabilistic branch and bound with single-observation
//! estimation, a replication-based variant, baseline optimizers, solution
//! quality metrics, and a seeded benchmark harness for noisy black-box
//! multi-objective problems over mixed continuous/integer box domains.
//!
//! The solver partitions the domain into axis-aligned boxes, samples them
//! uniformly, estimates objectives either from single observations pooled in
//! shrinking neighborhoods (`so`) or from replication means (`wr`), keeps the
//! non-dominated samples, prunes boxes holding none of them (with later
//! reclassification when new evidence appears), and branches the rest. The
//! active boxes at termination approximate the Pareto optimal set.

pub mod baselines;
pub mod domain;
pub mod engine;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod harness;
pub mod metrics;
pub mod pareto;
pub mod problems;
pub mod rng;

pub use error::{Error, Result};
