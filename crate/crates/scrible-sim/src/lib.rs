//! Experiment harness and CLI around [`scrible_core`]: seeded runs and
//! sweeps, trace-invariant checks, closed-form regret bounds, CSV and SVG
//! emission, and runtime validation of the barrier and sampler.

// Comparisons written as `!(x > 0.0)` are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod chart;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod harness;
pub mod validate;
