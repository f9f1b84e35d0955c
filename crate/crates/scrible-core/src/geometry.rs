//! The action set: a Euclidean ball `K` of radius `D` containing the unit
//! ball, its shrinkage `K_δ = (1-δ)·K`, and points lifted onto the slice
//! `K' = {(x, 1) : x ∈ K}` of the conic hull.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;

/// Absolute tolerance on norm comparisons in membership tests; absorbs
/// floating-point drift from the solver without admitting meaningfully
/// infeasible points.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// The ball action set `K = {x ∈ R^d : ‖x‖ ≤ D}` with `D ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallActionSet {
    dimension: usize,
    radius: f64,
}

impl BallActionSet {
    pub fn new(dimension: usize, radius: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !(radius >= 1.0) {
            return Err(Error::invalid(
                "radius must be at least 1 (the set must contain the unit ball)",
            ));
        }
        Ok(BallActionSet { dimension, radius })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Membership test with the default tolerance.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.contains_with_tol(x, MEMBERSHIP_TOL)
    }

    /// Membership test `‖x‖ ≤ D + tol`.
    pub fn contains_with_tol(&self, x: &[f64], tol: f64) -> Result<bool> {
        self.check_dimension(x)?;
        Ok(linalg::norm(x) <= self.radius + tol)
    }

    /// The shrunk set `K_δ`.
    pub fn shrink(&self, delta: f64) -> Result<ShrunkSet> {
        ShrunkSet::new(self.clone(), delta)
    }

    /// `argmin_{x ∈ K} θᵀx`: the antipodal boundary point `-D·θ/‖θ‖`, or the
    /// center when `θ = 0` (all points tie; the center is the deterministic
    /// choice).
    pub fn linear_optimum(&self, theta_sum: &[f64]) -> Result<Vec<f64>> {
        self.check_dimension(theta_sum)?;
        let n = linalg::norm(theta_sum);
        if n == 0.0 {
            return Ok(alloc::vec![0.0; self.dimension]);
        }
        Ok(linalg::scaled(theta_sum, -self.radius / n))
    }

    /// `min_{x ∈ K} θᵀx = -D·‖θ‖`.
    pub fn linear_optimum_value(&self, theta_sum: &[f64]) -> Result<f64> {
        self.check_dimension(theta_sum)?;
        Ok(-self.radius * linalg::norm(theta_sum))
    }

    pub(crate) fn check_dimension(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// The shrunk set `K_δ = {x : x/(1-δ) ∈ K}`, i.e. the ball of radius `(1-δ)·D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrunkSet {
    parent: BallActionSet,
    delta: f64,
}

impl ShrunkSet {
    pub fn new(parent: BallActionSet, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        Ok(ShrunkSet { parent, delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn parent(&self) -> &BallActionSet {
        &self.parent
    }

    /// Radius `(1-δ)·D` of the shrunk ball.
    pub fn radius(&self) -> f64 {
        (1.0 - self.delta) * self.parent.radius()
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.parent.check_dimension(x)?;
        Ok(linalg::norm(x) <= self.radius() + MEMBERSHIP_TOL)
    }
}

/// A point on the slice `{(x, 1)}` of the cone. Only the spatial part is
/// stored, so the last coordinate is 1 by construction rather than by
/// bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    spatial: Vec<f64>,
}

impl LiftedPoint {
    /// Lifts `x ∈ R^d` to `(x, 1)`.
    pub fn lift(spatial: Vec<f64>) -> Self {
        LiftedPoint { spatial }
    }

    /// Inverse of [`lift`](Self::lift): recovers the spatial part.
    pub fn drop_lift(self) -> Vec<f64> {
        self.spatial
    }

    pub fn spatial(&self) -> &[f64] {
        &self.spatial
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial.len()
    }

    /// Full coordinates `(x, 1) ∈ R^{d+1}`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.spatial.clone();
        c.push(1.0);
        c
    }
}
