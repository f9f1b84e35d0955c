//! The per-round FTRL subproblem: minimize `η·(Σ g_τ)ᵀx' + R(x')` over the
//! shrunk slice `K'_δ`.
//!
//! On the slice the last coordinate is pinned to 1, so the problem is
//! d-dimensional: minimize `lᵀx + R_ball(x)` over the ball of radius
//! `(1-δ)·D`, where `l` is the spatial part of the linear term and `R_ball`
//! is the slice restriction of the cone barrier (see [`crate::barrier`]).
//! The unlifted baseline solves the identical shape of problem directly.
//!
//! The feasible region is a single centered ball, so at most one constraint
//! can ever be active and an active-set strategy degenerates to: run damped
//! Newton; if an iterate leaves the ball, pull it back radially and keep
//! going; accept boundary optimality when the KKT multiplier is nonnegative.

use alloc::{vec::Vec};

use crate::barrier::BallBarrier;
use crate::error::{Error, Result};
use crate::linalg;

/// Damped-Newton iteration cap.
const MAX_NEWTON_STEPS: usize = 200;
/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
/// Step halvings before the line search gives up.
const MAX_HALVINGS: usize = 64;
/// Newton-decrement-squared threshold below which full steps are taken with
/// no line search. In the quadratic phase the true per-step decrease sits
/// under the floating-point noise of the objective value, so an Armijo test
/// would reject progress; self-concordance of the barrier guarantees plain
/// Newton converges from here.
const QUADRATIC_PHASE: f64 = 1.0 / 16.0;
/// Relative first-order tolerance: `‖∇φ‖ ≤ 1e-8·(1 + ‖linear term‖)`.
const GRAD_TOL: f64 = 1e-8;
/// Radial pull-back leaves iterates at `(1-δ)D·(1 - 1e-11)`: strictly inside
/// `K_δ` (so the point is a valid warm start next round) yet within the
/// 1e-10 boundary tolerance of the contract.
const PROJECTION_MARGIN: f64 = 1e-11;
/// Points with `‖x‖ ≥ (1-δ)D - 1e-10` are candidates for boundary optimality.
const BOUNDARY_BAND: f64 = 1e-10;

/// The strictly convex objective `lᵀx + R(x)` over the shrunk ball.
#[derive(Debug, Clone)]
pub struct FtrlObjective<'a> {
    barrier: &'a BallBarrier,
    spatial_linear: Vec<f64>,
    radius: f64,
    grad_tol: f64,
}

/// Minimizer returned by [`FtrlObjective::minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct FtrlSolution {
    /// Spatial minimizer, inside the shrunk ball.
    pub x: Vec<f64>,
    /// Newton steps taken.
    pub iterations: usize,
    /// Final first-order residual (gradient norm, or tangential KKT residual
    /// for a boundary solution).
    pub residual: f64,
    /// Whether the ball constraint is active at the solution.
    pub on_boundary: bool,
}

impl<'a> FtrlObjective<'a> {
    /// Builds the slice objective. `linear` may have length `d` (unlifted) or
    /// `d + 1` (lifted; the last coordinate multiplies the constant 1 on the
    /// slice and drops out of the argmin, but still counts toward the
    /// tolerance scale).
    pub fn new(barrier: &'a BallBarrier, linear: &[f64], delta: f64) -> Result<Self> {
        let d = barrier.dim();
        if linear.len() != d && linear.len() != d + 1 {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: linear.len(),
            });
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid("delta must lie in (0, 1)"));
        }
        let radius = (1.0 - delta) * barrier.set().radius();
        Ok(FtrlObjective {
            barrier,
            spatial_linear: linear[..d].to_vec(),
            radius,
            grad_tol: GRAD_TOL * (1.0 + linalg::norm(linear)),
        })
    }

    /// Radius `(1-δ)·D` of the feasible ball.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `lᵀx + R(x)` (without the constant last-coordinate term).
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(linalg::dot(&self.spatial_linear, x) + self.barrier.value(x)?)
    }

    /// `l + ∇R(x)`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.barrier.gradient(x)?;
        linalg::axpy(1.0, &self.spatial_linear, &mut g);
        Ok(g)
    }

    /// `x + α·direction`, pulled back radially just inside the shrunk ball
    /// if the raw step leaves it.
    fn pull_back(&self, x: &[f64], direction: &[f64], alpha: f64) -> Vec<f64> {
        let mut candidate = x.to_vec();
        linalg::axpy(alpha, direction, &mut candidate);
        let norm = linalg::norm(&candidate);
        if norm > self.radius {
            candidate = linalg::scaled(
                &candidate,
                self.radius * (1.0 - PROJECTION_MARGIN) / norm,
            );
        }
        candidate
    }

    /// Damped Newton from a warm start strictly inside the shrunk ball.
    ///
    /// Terminates at an interior point with `‖∇φ‖ ≤ 1e-8·(1 + ‖l‖)`, or on
    /// the ball boundary (within 1e-10) with a nonnegative KKT multiplier
    /// and the same bound on the tangential residual. Deterministic: equal
    /// inputs produce bitwise-equal outputs.
    pub fn minimize(&self, warm_start: &[f64]) -> Result<FtrlSolution> {
        let d = self.barrier.dim();
        if warm_start.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: warm_start.len(),
            });
        }
        if linalg::norm(warm_start) >= self.radius {
            return Err(Error::invalid(
                "warm start must be strictly inside the shrunk set",
            ));
        }

        let mut x = warm_start.to_vec();
        let mut residual = f64::INFINITY;
        for iter in 0..=MAX_NEWTON_STEPS {
            let grad = self.gradient(&x)?;
            let grad_norm = linalg::norm(&grad);
            residual = grad_norm;
            if grad_norm <= self.grad_tol {
                return Ok(FtrlSolution {
                    x,
                    iterations: iter,
                    residual: grad_norm,
                    on_boundary: false,
                });
            }

            let x_norm = linalg::norm(&x);
            if x_norm >= self.radius - BOUNDARY_BAND {
                // ∇φ = -λ·x/‖x‖ with λ ≥ 0 certifies boundary optimality.
                let unit = linalg::scaled(&x, 1.0 / x_norm);
                let lambda = -linalg::dot(&grad, &unit);
                if lambda >= 0.0 {
                    let mut tangential = grad.clone();
                    linalg::axpy(lambda, &unit, &mut tangential);
                    let kkt = linalg::norm(&tangential);
                    residual = kkt;
                    if kkt <= self.grad_tol {
                        return Ok(FtrlSolution {
                            x,
                            iterations: iter,
                            residual: kkt,
                            on_boundary: true,
                        });
                    }
                    // Constraint active but the angle is off. The barrier is
                    // radial, so on the shell the objective is exactly
                    // linear and the sphere-restricted minimizer is the
                    // antipodal point of the linear term; projected Newton
                    // would only crawl toward it.
                    let l_norm = linalg::norm(&self.spatial_linear);
                    if l_norm > 0.0 && iter < MAX_NEWTON_STEPS {
                        x = linalg::scaled(
                            &self.spatial_linear,
                            -(self.radius * (1.0 - PROJECTION_MARGIN)) / l_norm,
                        );
                        continue;
                    }
                }
            }
            if iter == MAX_NEWTON_STEPS {
                break;
            }

            let hessian = self.barrier.hessian(&x)?;
            let direction = linalg::solve_spd(&hessian, &linalg::scaled(&grad, -1.0))?;

            // Quadratic phase: accept the full Newton step without a line
            // search when it stays inside the ball and the squared decrement
            // is small; self-concordance guarantees descent and domain
            // feasibility from there. Projected steps never take this path.
            let mut full = x.clone();
            linalg::axpy(1.0, &direction, &mut full);
            if linalg::norm(&full) <= self.radius {
                let decrement_sq = -linalg::dot(&grad, &direction);
                if decrement_sq <= QUADRATIC_PHASE {
                    x = full;
                    continue;
                }
            }

            let phi0 = self.value(&x)?;
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let candidate = self.pull_back(&x, &direction, alpha);
                // Armijo on the actual displacement, which differs from
                // α·direction when the radial pull-back fired.
                let decrease = linalg::dot(&grad, &linalg::sub(&candidate, &x));
                if decrease < 0.0 {
                    // value() fails outside the cone; that just shrinks the step.
                    if let Ok(phi) = self.value(&candidate) {
                        if phi <= phi0 + ARMIJO * decrease {
                            accepted = Some(candidate);
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
            match accepted {
                Some(next) => x = next,
                None => {
                    return Err(Error::NoConvergence {
                        iterations: iter,
                        residual,
                    })
                }
            }
        }
        Err(Error::NoConvergence {
            iterations: MAX_NEWTON_STEPS,
            residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BallActionSet;
    use crate::sampling::SeededRng;

    fn ball(d: usize, radius: f64, scale: f64) -> BallBarrier {
        BallBarrier::with_scale(BallActionSet::new(d, radius).unwrap(), scale).unwrap()
    }

    #[test]
    fn zero_linear_term_returns_the_center() {
        let barrier = ball(5, 5.0, 400.0);
        let obj = FtrlObjective::new(&barrier, &[0.0; 6], 0.1).unwrap();
        // Exact warm start at the optimum: zero iterations, bitwise center.
        let sol = obj.minimize(&[0.0; 5]).unwrap();
        assert_eq!(sol.x, vec![0.0; 5]);
        assert_eq!(sol.iterations, 0);

        // Any other warm start converges back to the center.
        let warm = [1.0, -2.0, 0.5, 3.0, -1.0];
        let sol = obj.minimize(&warm).unwrap();
        assert!(linalg::norm(&sol.x) <= 1e-9, "‖x‖ = {}", linalg::norm(&sol.x));
        assert!(!sol.on_boundary);
    }

    /// In one dimension with D = 1, c = 400 the interior stationarity
    /// condition `γ + 800·x/(1-x²) = 0` is the quadratic `γx² - 800x - γ = 0`
    /// whose root in (-1, 1) is a closed form.
    #[test]
    fn one_dimensional_minimizer_matches_quadratic_root() {
        let barrier = ball(1, 1.0, 400.0);
        for gamma in [800.0, -800.0, 50.0, -125.0, 421.7] {
            let obj = FtrlObjective::new(&barrier, &[gamma], 0.05).unwrap();
            let sol = obj.minimize(&[0.0]).unwrap();
            let root = (800.0 - (800.0_f64 * 800.0 + 4.0 * gamma * gamma).sqrt()) / (2.0 * gamma);
            assert!(root.abs() < 1.0);
            assert!(
                (sol.x[0] - root).abs() <= 1e-8 * (1.0 + root.abs()),
                "γ = {gamma}: got {}, oracle {root}",
                sol.x[0]
            );
            assert!(!sol.on_boundary);
        }
    }

    #[test]
    fn golden_ratio_special_case() {
        // γ = 800 makes the root -1/φ = -0.6180339887498949.
        let barrier = ball(1, 1.0, 400.0);
        let obj = FtrlObjective::new(&barrier, &[800.0], 0.05).unwrap();
        let sol = obj.minimize(&[0.0]).unwrap();
        assert!((sol.x[0] - (-0.618033988749894_9)).abs() < 1e-9);
    }

    #[test]
    fn large_linear_term_lands_on_the_boundary_with_valid_kkt() {
        let barrier = ball(4, 5.0, 400.0);
        let delta = 0.1;
        let mut rng = SeededRng::new(31);
        for scale in [1e4, 1e6, 3e7] {
            let mut linear = rng.standard_normal_vec(4);
            linear = linalg::scaled(&linear, scale / linalg::norm(&linear));
            let obj = FtrlObjective::new(&barrier, &linear, delta).unwrap();
            let sol = obj.minimize(&[0.0; 4]).unwrap();
            let radius = (1.0 - delta) * 5.0;
            assert!(sol.on_boundary);
            assert!(
                (linalg::norm(&sol.x) - radius).abs() <= 1e-10,
                "‖x‖ = {} vs radius {radius}",
                linalg::norm(&sol.x)
            );
            // KKT: gradient is anti-radial with nonnegative multiplier.
            let grad = obj.gradient(&sol.x).unwrap();
            let unit = linalg::scaled(&sol.x, 1.0 / linalg::norm(&sol.x));
            let lambda = -linalg::dot(&grad, &unit);
            assert!(lambda >= 0.0);
            let mut tang = grad.clone();
            linalg::axpy(lambda, &unit, &mut tang);
            assert!(linalg::norm(&tang) <= 1e-8 * (1.0 + scale));
        }
    }

    #[test]
    fn descent_and_determinism() {
        let barrier = ball(5, 5.0, 400.0);
        let mut rng = SeededRng::new(32);
        for _ in 0..25 {
            let linear = linalg::scaled(&rng.standard_normal_vec(5), 200.0);
            let raw = rng.standard_normal_vec(5);
            let warm = linalg::scaled(&raw, 2.0 * rng.uniform() / linalg::norm(&raw));
            let obj = FtrlObjective::new(&barrier, &linear, 0.2).unwrap();
            let a = obj.minimize(&warm).unwrap();
            let b = obj.minimize(&warm).unwrap();
            assert_eq!(a, b);
            assert!(obj.value(&a.x).unwrap() <= obj.value(&warm).unwrap() + 1e-12);
            // Output is strictly evaluable (inside the cone).
            assert!(barrier.value(&a.x).is_ok());
        }
    }

    #[test]
    fn accepts_lifted_length_linear_terms() {
        let barrier = ball(3, 5.0, 400.0);
        // d+1 coefficients: the last one is constant on the slice.
        let with_last = FtrlObjective::new(&barrier, &[10.0, -4.0, 2.0, 99.0], 0.1).unwrap();
        let without = FtrlObjective::new(&barrier, &[10.0, -4.0, 2.0], 0.1).unwrap();
        let a = with_last.minimize(&[0.0; 3]).unwrap();
        let b = without.minimize(&[0.0; 3]).unwrap();
        for (u, v) in a.x.iter().zip(&b.x) {
            assert!((u - v).abs() <= 1e-10);
        }
    }

    /// First-order conditions verified independently across shrinkages from
    /// heavy (δ = 0.9) to razor-thin (δ = 2.5e-7, the T = 2000 default) and
    /// linear terms from the boundary-activation threshold up to 1e10.
    #[test]
    fn extreme_shrinkage_and_linear_magnitudes_converge() {
        let barrier = ball(5, 5.0, 400.0);
        let mut rng = SeededRng::new(77);
        for &delta in &[0.2, 2.5e-7, 0.9] {
            for &magnitude in &[355.0, 1e5, 3.2e8, 1e10] {
                for _ in 0..5 {
                    let raw_l = rng.standard_normal_vec(5);
                    let linear = linalg::scaled(&raw_l, magnitude / linalg::norm(&raw_l));
                    let raw_w = rng.standard_normal_vec(5);
                    let warm = linalg::scaled(
                        &raw_w,
                        (1.0 - delta) * 5.0 * 0.98 * rng.uniform() / linalg::norm(&raw_w),
                    );
                    let obj = FtrlObjective::new(&barrier, &linear, delta).unwrap();
                    let sol = obj
                        .minimize(&warm)
                        .unwrap_or_else(|e| panic!("δ={delta:e} ‖l‖={magnitude:e}: {e}"));
                    let grad = obj.gradient(&sol.x).unwrap();
                    let tol = 1e-8 * (1.0 + magnitude);
                    if sol.on_boundary {
                        let radius = (1.0 - delta) * 5.0;
                        let x_norm = linalg::norm(&sol.x);
                        assert!((x_norm - radius).abs() <= 1e-10);
                        let unit = linalg::scaled(&sol.x, 1.0 / x_norm);
                        let lambda = -linalg::dot(&grad, &unit);
                        assert!(lambda >= 0.0);
                        let mut tang = grad.clone();
                        linalg::axpy(lambda, &unit, &mut tang);
                        assert!(linalg::norm(&tang) <= tol);
                    } else {
                        assert!(linalg::norm(&grad) <= tol);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let barrier = ball(3, 5.0, 400.0);
        assert!(FtrlObjective::new(&barrier, &[0.0; 2], 0.1).is_err());
        assert!(FtrlObjective::new(&barrier, &[0.0; 3], 0.0).is_err());
        assert!(FtrlObjective::new(&barrier, &[0.0; 3], 1.0).is_err());
        let obj = FtrlObjective::new(&barrier, &[1.0, 0.0, 0.0], 0.1).unwrap();
        // Warm start on/outside the shrunk ball is rejected.
        assert!(obj.minimize(&[4.5, 0.0, 0.0]).is_err());
        assert!(obj.minimize(&[5.5, 0.0, 0.0]).is_err());
        assert!(obj.minimize(&[0.0; 4]).is_err());
    }
}
