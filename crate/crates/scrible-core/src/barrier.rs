//! The logarithmically homogeneous self-concordant barrier on the conic hull
//! of the lifted ball, plus the plain ball barrier used by the unlifted
//! baseline.
//!
//! For the ball `K` of radius `D`, the cone is
//! `con(K) = {0} ∪ {(x, b) : ‖x‖ ≤ b·D, b > 0}` and the barrier is
//!
//! ```text
//! R(x, b) = c · ( -ln(1 - ‖x‖²/(b²D²)) - 2·n·ln b )
//! ```
//!
//! with scale `c` (default 400) and inner parameter `n` (default 1). The
//! scaling makes `R` logarithmically homogeneous with parameter
//! `ν = 2·c·n` — `R(t·p) = R(p) - ν·ln t` — which is the testable ground
//! truth behind every identity in [`ConeBarrier::validate_normal_barrier`].
//! Gradients and Hessians are exact closed forms; writing `s = ‖x‖²` and
//! `w = b²D² - s`:
//!
//! ```text
//! ∇_x R = (2c/w)·x                 ∂R/∂b = -(2c/b)·(s/w + n)
//! H_xx  = (2c/w)·I + (4c/w²)·xxᵀ   H_xb  = -(4cbD²/w²)·x
//! H_bb  = (2c/b²)·(s/w + n) + 4cD²s/w²
//! ```
//!
//! Restricted to the slice `b = 1` the cone barrier coincides with the ball
//! barrier `-c·ln(1 - ‖x‖²/D²)` (the `ln b` term vanishes), which is why the
//! FTRL subproblem for lifted and unlifted learners shares one solver.

use alloc::{format, vec::Vec};

use crate::error::{Error, Result};
use crate::geometry::BallActionSet;
use crate::linalg::{self, Matrix, SymEigen};
use crate::math;
use crate::sampling::{sample_unit_sphere, SeededRng};

/// Barrier scale used throughout unless overridden.
pub const DEFAULT_SCALE: f64 = 400.0;
/// Inner homogeneity parameter of the unscaled cone barrier.
pub const DEFAULT_INNER_NU: f64 = 1.0;
/// `eval` rejects points with `1 - ‖x‖²/(b²D²)` at or below this; the log and
/// the divisions blow up there, and a clean domain error beats a silent NaN.
pub const BOUNDARY_GUARD: f64 = 1e-14;
/// Hessian eigenvalues below this signal a point numerically on the boundary.
pub const MIN_EIGENVALUE: f64 = 1e-14;

/// Value, gradient, and Hessian of a barrier at one point.
#[derive(Debug, Clone)]
pub struct BarrierEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Matrix,
}

/// Eigendecomposition of a barrier Hessian, exposing the symmetric powers
/// `H^{±1/2}` the sampler needs.
///
/// The inverse square root must itself be symmetric: the direction draw
/// relies on `μ ⊥ A·e_{d+1} ⇔ (A·μ) ⊥ e_{d+1}`, which holds only for
/// symmetric `A`. A full symmetric eigendecomposition guarantees that where a
/// Cholesky-based root would not.
#[derive(Debug, Clone)]
pub struct HessianFactors {
    eigen: SymEigen,
}

impl HessianFactors {
    fn new(hessian: &Matrix) -> Result<Self> {
        let eigen = linalg::sym_eigen(hessian)?;
        let min = eigen.min_value();
        if min < MIN_EIGENVALUE {
            return Err(Error::IllConditioned {
                min_eigenvalue: min,
            });
        }
        Ok(HessianFactors { eigen })
    }

    /// The symmetric matrix `A = H^{-1/2}`.
    pub fn inv_sqrt_matrix(&self) -> Matrix {
        self.eigen.matrix_fn(|l| 1.0 / math::sqrt(l))
    }

    /// `A·x = H^{-1/2}·x`.
    pub fn apply_inv_sqrt(&self, x: &[f64]) -> Vec<f64> {
        self.eigen.apply_fn(|l| 1.0 / math::sqrt(l), x)
    }

    /// `A⁻¹·x = H^{1/2}·x` (the linear solve `A·z = x` done through the
    /// eigenfactors rather than by forming an inverse).
    pub fn apply_sqrt(&self, x: &[f64]) -> Vec<f64> {
        self.eigen.apply_fn(math::sqrt, x)
    }

    /// `H·x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.eigen.apply_fn(|l| l, x)
    }

    /// `H⁻¹·x`.
    pub fn apply_inv(&self, x: &[f64]) -> Vec<f64> {
        self.eigen.apply_fn(|l| 1.0 / l, x)
    }

    /// `√(xᵀHx)`.
    pub fn local_norm(&self, x: &[f64]) -> f64 {
        math::sqrt(linalg::dot(x, &self.apply(x)).max(0.0))
    }

    /// `√(xᵀH⁻¹x)`.
    pub fn dual_local_norm(&self, x: &[f64]) -> f64 {
        math::sqrt(linalg::dot(x, &self.apply_inv(x)).max(0.0))
    }
}

/// Residuals of the normal-barrier identities at one interior point, each
/// normalized so "within tol" is a direct comparison:
///
/// - `homogeneity`: `|R(t·p) - R(p) + ν·ln t| / (1 + |R(p)|)`
/// - `norm_identity`: `|‖p‖²_p - ν| / ν`
/// - `hessian_identity`: `‖∇²R(p)·p + ∇R(p)‖ / (1 + ‖∇R(p)‖)`
/// - `gradient_bound_excess`: max over random directions `h` of
///   `(|∇R(p)ᵀh| - √ν·‖h‖_p) / (√ν·‖h‖_p)`, which must be ≤ 0 up to
///   tolerance.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub homogeneity: f64,
    pub norm_identity: f64,
    pub hessian_identity: f64,
    pub gradient_bound_excess: f64,
}

impl ValidationReport {
    /// Largest residual; the sign of `gradient_bound_excess` is kept, so a
    /// comfortably satisfied bound does not mask another failing identity.
    pub fn max_residual(&self) -> f64 {
        self.homogeneity
            .max(self.norm_identity)
            .max(self.hessian_identity)
            .max(self.gradient_bound_excess)
    }
}

/// The ν-normal barrier on `con(K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeBarrier {
    set: BallActionSet,
    scale: f64,
    inner_nu: f64,
}

impl ConeBarrier {
    /// Barrier with the default scale 400 and inner parameter 1
    /// (homogeneity parameter `ν = 800`).
    pub fn new(set: BallActionSet) -> Self {
        ConeBarrier {
            set,
            scale: DEFAULT_SCALE,
            inner_nu: DEFAULT_INNER_NU,
        }
    }

    pub fn with_parameters(set: BallActionSet, scale: f64, inner_nu: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::invalid("barrier scale must be positive and finite"));
        }
        if !(inner_nu >= 1.0) || !inner_nu.is_finite() {
            return Err(Error::invalid("barrier inner parameter must be at least 1"));
        }
        Ok(ConeBarrier {
            set,
            scale,
            inner_nu,
        })
    }

    pub fn set(&self) -> &BallActionSet {
        &self.set
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn inner_nu(&self) -> f64 {
        self.inner_nu
    }

    /// The homogeneity parameter `ν = 2·c·n` satisfying
    /// `R(t·p) = R(p) - ν·ln t`.
    pub fn effective_nu(&self) -> f64 {
        2.0 * self.scale * self.inner_nu
    }

    /// Ambient dimension `d + 1` of the cone.
    pub fn ambient_dim(&self) -> usize {
        self.set.dimension() + 1
    }

    /// The ball barrier the cone restricts to on the slice `b = 1`.
    pub fn slice(&self) -> BallBarrier {
        BallBarrier {
            set: self.set.clone(),
            scale: self.scale,
        }
    }

    fn split<'a>(&self, p: &'a [f64]) -> Result<(&'a [f64], f64)> {
        if p.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: p.len(),
            });
        }
        Ok((&p[..p.len() - 1], p[p.len() - 1]))
    }

    /// Interior quantities (s, w, q) or a domain error naming the violated
    /// constraint.
    fn interior(&self, p: &[f64]) -> Result<(f64, f64, f64, f64)> {
        let (x, b) = self.split(p)?;
        if !(b > 0.0) {
            return Err(Error::domain(format!(
                "cone requires b > 0, got b = {b}"
            )));
        }
        let s = linalg::norm_sq(x);
        let bd2 = b * b * self.set.radius() * self.set.radius();
        let q = 1.0 - s / bd2;
        if !(q > BOUNDARY_GUARD) {
            return Err(Error::domain(format!(
                "point violates ‖x‖ < b·D: 1 - ‖x‖²/(b²D²) = {q:e}"
            )));
        }
        Ok((s, bd2 - s, q, b))
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        let (s, _, _, b) = self.interior(p)?;
        // ln_1p keeps full relative precision near the center, where
        // ln(1 - u) would leave an absolute noise floor of ~1e-16·c that the
        // FTRL line search can feel.
        let u = s / (b * b * self.set.radius() * self.set.radius());
        Ok(self.scale * (-math::ln_1p(-u) - 2.0 * self.inner_nu * math::ln(b)))
    }

    pub fn gradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        let (s, w, _, b) = self.interior(p)?;
        let x = &p[..p.len() - 1];
        let c = self.scale;
        let mut g = linalg::scaled(x, 2.0 * c / w);
        g.push(-(2.0 * c / b) * (s / w + self.inner_nu));
        Ok(g)
    }

    pub fn hessian(&self, p: &[f64]) -> Result<Matrix> {
        let (s, w, _, b) = self.interior(p)?;
        let x = &p[..p.len() - 1];
        let d = x.len();
        let c = self.scale;
        let d2 = self.set.radius() * self.set.radius();
        let mut h = Matrix::zeros(d + 1, d + 1);
        let diag = 2.0 * c / w;
        let outer = 4.0 * c / (w * w);
        for i in 0..d {
            for j in 0..d {
                let mut v = outer * x[i] * x[j];
                if i == j {
                    v += diag;
                }
                h.set(i, j, v);
            }
        }
        let cross = -4.0 * c * b * d2 / (w * w);
        for i in 0..d {
            h.set(i, d, cross * x[i]);
            h.set(d, i, cross * x[i]);
        }
        let hbb = (2.0 * c / (b * b)) * (s / w + self.inner_nu) + 4.0 * c * d2 * s / (w * w);
        h.set(d, d, hbb);
        Ok(h)
    }

    pub fn eval(&self, p: &[f64]) -> Result<BarrierEval> {
        Ok(BarrierEval {
            value: self.value(p)?,
            gradient: self.gradient(p)?,
            hessian: self.hessian(p)?,
        })
    }

    /// Eigenfactors of the Hessian at `p` (fails with an ill-conditioning
    /// error if an eigenvalue drops below [`MIN_EIGENVALUE`]).
    pub fn hessian_factors(&self, p: &[f64]) -> Result<HessianFactors> {
        HessianFactors::new(&self.hessian(p)?)
    }

    /// The symmetric matrix `A = [∇²R(p)]^{-1/2}`, satisfying
    /// `‖A·H·A - I‖_max ≤ 1e-8`.
    pub fn inv_sqrt_hessian(&self, p: &[f64]) -> Result<Matrix> {
        Ok(self.hessian_factors(p)?.inv_sqrt_matrix())
    }

    /// `‖h‖_p = √(hᵀ ∇²R(p) h)`.
    pub fn local_norm(&self, p: &[f64], h: &[f64]) -> Result<f64> {
        let hess = self.hessian(p)?;
        if h.len() != hess.rows() {
            return Err(Error::DimensionMismatch {
                expected: hess.rows(),
                got: h.len(),
            });
        }
        Ok(math::sqrt(hess.quadratic_form(h, h).max(0.0)))
    }

    /// `‖h‖*_p = √(hᵀ [∇²R(p)]⁻¹ h)`, via a linear solve rather than an
    /// explicit inverse.
    pub fn dual_local_norm(&self, p: &[f64], h: &[f64]) -> Result<f64> {
        let hess = self.hessian(p)?;
        if h.len() != hess.rows() {
            return Err(Error::DimensionMismatch {
                expected: hess.rows(),
                got: h.len(),
            });
        }
        let z = linalg::solve_spd(&hess, h)?;
        Ok(math::sqrt(linalg::dot(h, &z).max(0.0)))
    }

    /// Evaluates the normal-barrier identities at `p` (see
    /// [`ValidationReport`] for the exact residuals). `t` scales `p` for the
    /// homogeneity check; both `p` and `t·p` must be interior.
    pub fn validate_normal_barrier(
        &self,
        p: &[f64],
        t: f64,
        rng: &mut SeededRng,
    ) -> Result<ValidationReport> {
        if !(t > 0.0) {
            return Err(Error::invalid("homogeneity scale t must be positive"));
        }
        let nu = self.effective_nu();
        let value = self.value(p)?;
        let gradient = self.gradient(p)?;
        let hessian = self.hessian(p)?;
        let scaled_p = linalg::scaled(p, t);
        let value_scaled = self.value(&scaled_p)?;

        let homogeneity =
            (value_scaled - value + nu * math::ln(t)).abs() / (1.0 + value.abs());

        let p_norm_sq = hessian.quadratic_form(p, p);
        let norm_identity = (p_norm_sq - nu).abs() / nu;

        let mut residual = hessian.matvec(p);
        linalg::axpy(1.0, &gradient, &mut residual);
        let hessian_identity = linalg::norm(&residual) / (1.0 + linalg::norm(&gradient));

        let sqrt_nu = math::sqrt(nu);
        let mut gradient_bound_excess = f64::NEG_INFINITY;
        for _ in 0..10 {
            let h = sample_unit_sphere(p.len(), rng)?;
            let local = math::sqrt(hessian.quadratic_form(&h, &h).max(0.0));
            let excess = (linalg::dot(&gradient, &h).abs() - sqrt_nu * local) / (sqrt_nu * local);
            gradient_bound_excess = gradient_bound_excess.max(excess);
        }

        Ok(ValidationReport {
            homogeneity,
            norm_identity,
            hessian_identity,
            gradient_bound_excess,
        })
    }
}

/// The barrier `-c·ln(1 - ‖x‖²/D²)` on the ball `K` itself; the regularizer
/// of the unlifted baseline and the slice restriction of [`ConeBarrier`].
#[derive(Debug, Clone, PartialEq)]
pub struct BallBarrier {
    set: BallActionSet,
    scale: f64,
}

impl BallBarrier {
    pub fn new(set: BallActionSet) -> Self {
        BallBarrier {
            set,
            scale: DEFAULT_SCALE,
        }
    }

    pub fn with_scale(set: BallActionSet, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::invalid("barrier scale must be positive and finite"));
        }
        Ok(BallBarrier { set, scale })
    }

    pub fn set(&self) -> &BallActionSet {
        &self.set
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.set.dimension()
    }

    fn interior(&self, x: &[f64]) -> Result<(f64, f64, f64)> {
        self.set.check_dimension(x)?;
        let s = linalg::norm_sq(x);
        let d2 = self.set.radius() * self.set.radius();
        let q = 1.0 - s / d2;
        if !(q > BOUNDARY_GUARD) {
            return Err(Error::domain(format!(
                "point violates ‖x‖ < D: 1 - ‖x‖²/D² = {q:e}"
            )));
        }
        Ok((s, d2 - s, q))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let (s, _, _) = self.interior(x)?;
        let u = s / (self.set.radius() * self.set.radius());
        Ok(-self.scale * math::ln_1p(-u))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (_, w, _) = self.interior(x)?;
        Ok(linalg::scaled(x, 2.0 * self.scale / w))
    }

    pub fn hessian(&self, x: &[f64]) -> Result<Matrix> {
        let (_, w, _) = self.interior(x)?;
        let d = x.len();
        let c = self.scale;
        let diag = 2.0 * c / w;
        let outer = 4.0 * c / (w * w);
        let mut h = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut v = outer * x[i] * x[j];
                if i == j {
                    v += diag;
                }
                h.set(i, j, v);
            }
        }
        Ok(h)
    }

    pub fn eval(&self, x: &[f64]) -> Result<BarrierEval> {
        Ok(BarrierEval {
            value: self.value(x)?,
            gradient: self.gradient(x)?,
            hessian: self.hessian(x)?,
        })
    }

    pub fn hessian_factors(&self, x: &[f64]) -> Result<HessianFactors> {
        HessianFactors::new(&self.hessian(x)?)
    }

    pub fn local_norm(&self, x: &[f64], h: &[f64]) -> Result<f64> {
        let hess = self.hessian(x)?;
        if h.len() != hess.rows() {
            return Err(Error::DimensionMismatch {
                expected: hess.rows(),
                got: h.len(),
            });
        }
        Ok(math::sqrt(hess.quadratic_form(h, h).max(0.0)))
    }

    pub fn dual_local_norm(&self, x: &[f64], h: &[f64]) -> Result<f64> {
        let hess = self.hessian(x)?;
        if h.len() != hess.rows() {
            return Err(Error::DimensionMismatch {
                expected: hess.rows(),
                got: h.len(),
            });
        }
        let z = linalg::solve_spd(&hess, h)?;
        Ok(math::sqrt(linalg::dot(h, &z).max(0.0)))
    }
}
