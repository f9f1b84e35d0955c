//! Bandit linear optimization over approximately linear losses.
//!
//! A loss of the form `f(x) = θᵀx + σ(x)` with `|σ(x)| ≤ ε` everywhere on the
//! action set is *ε-approximately linear*: the adversary fixes the linear
//! vectors up front and may pick the bounded perturbation after seeing the
//! played point. This crate implements the self-concordant-barrier machinery
//! for learning against such losses from bandit feedback:
//!
//! - [`geometry`]: the ball action set `K`, its shrinkage `K_δ`, and the
//!   lifted slice `K' = {(x, 1) : x ∈ K}`.
//! - [`barrier`]: the logarithmically homogeneous barrier on the conic hull
//!   of `K'`, with analytic gradient/Hessian, local norms, and executable
//!   checks of the normal-barrier identities.
//! - [`sampling`]: seeded, reproducible random streams and uniform sampling
//!   on subspace spheres (the Dikin ellipsoid direction draw).
//! - [`ftrl`]: the damped-Newton solver for the per-round
//!   follow-the-regularized-leader subproblem.
//! - [`learner`]: the bandit learners behind a common act/update interface —
//!   lifted Dikin-ellipsoid sampling as the primary algorithm, the classic
//!   unlifted variant and an increasing-learning-rate schedule as baselines.
//! - [`adversary`]: oblivious linear loss sequences, perturbation rules, and
//!   the spike oracle that forces a `2ε` optimization gap.
//!
//! The crate is `no_std`-compatible (requires `alloc`; enable the `libm`
//! feature when building without `std`).

#![cfg_attr(not(feature = "std"), no_std)]
// Comparisons written as `!(x > 0.0)` are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("scrible-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod adversary;
pub mod barrier;
pub mod error;
pub mod ftrl;
pub mod geometry;
pub mod learner;
pub mod linalg;
mod math;
pub mod sampling;

pub use error::{Error, Result};
