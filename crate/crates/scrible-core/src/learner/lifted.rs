//! Dikin-ellipsoid sampling on the lifted slice.
//!
//! Per round, at the iterate `x'_t = (x_t, 1)`:
//!
//! 1. `A_t = [∇²R(x'_t)]^{-1/2}` for the cone barrier `R`.
//! 2. Draw `μ_t` uniformly from the unit sphere of `(A_t·e_{d+1})^⊥`; play
//!    `y'_t = x'_t + A_t·μ_t`. Orthogonality makes the last coordinate of
//!    `A_t·μ_t` vanish, so `y'_t` stays on the slice and `y_t ∈ K` by Dikin
//!    containment.
//! 3. Estimate `g_t = d·f_t(y_t)·A_t⁻¹·μ_t` from the observed scalar loss.
//! 4. FTRL: `x'_{t+1} = argmin_{x' ∈ K'_δ} η·Σ_{τ≤t} g_τᵀx' + R(x')`, warm
//!    started at `x'_t` (the new optimum is within a local-norm ball of the
//!    old one, so Newton converges in a handful of steps).

use alloc::{vec, vec::Vec};

use crate::barrier::{BallBarrier, ConeBarrier, HessianFactors};
use crate::error::{Error, Result};
use crate::ftrl::FtrlObjective;
use crate::geometry::{BallActionSet, ShrunkSet};
use crate::linalg;
use crate::math;
use crate::sampling::{sample_sphere_orthogonal, SeededRng};

use super::{
    AlgorithmKind, BanditLearner, BarrierConfig, LearnerParams, RoundRecord, LOSS_BOUND_SLACK,
};

/// Multiplicative learning-rate schedule for the increasing-rate baseline:
/// `η_t = η·κ^{m_t}` where `m_t` increments whenever the local-norm step
/// length exceeds `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct LrSchedule {
    pub kappa: f64,
    pub threshold: f64,
}

impl LrSchedule {
    /// Defaults `κ = e^{1/(d·ln T)}`, `ρ = 2dη`.
    pub fn defaults(dimension: usize, horizon: usize, eta: f64) -> Self {
        let d_ln_t = dimension as f64 * math::ln(horizon as f64);
        let kappa = if d_ln_t > 0.0 {
            math::exp(1.0 / d_ln_t)
        } else {
            1.0
        };
        LrSchedule {
            kappa,
            threshold: 2.0 * dimension as f64 * eta,
        }
    }
}

struct Pending {
    factors: HessianFactors,
    direction: Vec<f64>,
    play: Vec<f64>,
    dikin_norm: f64,
    lift_defect: f64,
}

/// The lifted Dikin-ellipsoid learner (optionally with an increasing
/// learning-rate schedule).
pub struct LiftedScrible {
    cone: ConeBarrier,
    slice: BallBarrier,
    shrunk: ShrunkSet,
    params: LearnerParams,
    schedule: Option<LrSchedule>,
    rate_exponent: u32,
    estimator_sum: Vec<f64>,
    x: Vec<f64>,
    pending: Option<Pending>,
    rounds: usize,
    max_abs_loss: f64,
    breaches: usize,
}

impl LiftedScrible {
    pub fn new(set: BallActionSet, params: LearnerParams, barrier: &BarrierConfig) -> Result<Self> {
        Self::build(set, params, barrier, None)
    }

    pub fn with_schedule(
        set: BallActionSet,
        params: LearnerParams,
        barrier: &BarrierConfig,
        schedule: LrSchedule,
    ) -> Result<Self> {
        if !(schedule.kappa >= 1.0) || !(schedule.threshold > 0.0) {
            return Err(Error::invalid(
                "schedule requires kappa ≥ 1 and a positive threshold",
            ));
        }
        Self::build(set, params, barrier, Some(schedule))
    }

    fn build(
        set: BallActionSet,
        params: LearnerParams,
        barrier: &BarrierConfig,
        schedule: Option<LrSchedule>,
    ) -> Result<Self> {
        if set.dimension() != params.dimension {
            return Err(Error::DimensionMismatch {
                expected: params.dimension,
                got: set.dimension(),
            });
        }
        let cone = ConeBarrier::with_parameters(set.clone(), barrier.scale, barrier.inner_nu)?;
        let slice = cone.slice();
        let shrunk = set.shrink(params.delta)?;
        let d = params.dimension;
        // The center minimizes the barrier over K'_δ by rotational symmetry,
        // which is exactly the FTRL solution for an empty estimator sum.
        Ok(LiftedScrible {
            cone,
            slice,
            shrunk,
            params,
            schedule,
            rate_exponent: 0,
            estimator_sum: vec![0.0; d + 1],
            x: vec![0.0; d],
            pending: None,
            rounds: 0,
            max_abs_loss: 0.0,
            breaches: 0,
        })
    }

    pub fn cone_barrier(&self) -> &ConeBarrier {
        &self.cone
    }

    pub fn slice_barrier(&self) -> &BallBarrier {
        &self.slice
    }

    pub fn shrunk_set(&self) -> &ShrunkSet {
        &self.shrunk
    }

    /// `m_t`: how many times the schedule has fired.
    pub fn rate_exponent(&self) -> u32 {
        self.rate_exponent
    }

    /// Learning rate the next update will use.
    pub fn current_eta(&self) -> f64 {
        match &self.schedule {
            None => self.params.eta,
            Some(s) => self.params.eta * math::powi(s.kappa, self.rate_exponent as i32),
        }
    }

    fn lifted(&self) -> Vec<f64> {
        let mut p = self.x.clone();
        p.push(1.0);
        p
    }
}

impl BanditLearner for LiftedScrible {
    fn kind(&self) -> AlgorithmKind {
        if self.schedule.is_some() {
            AlgorithmKind::IncreasingLr
        } else {
            AlgorithmKind::Lifted
        }
    }

    fn params(&self) -> &LearnerParams {
        &self.params
    }

    fn act(&mut self, rng: &mut SeededRng) -> Result<Vec<f64>> {
        if self.pending.is_some() {
            return Err(Error::invalid(
                "a round is already pending; call update before act",
            ));
        }
        let d = self.params.dimension;
        let point = self.lifted();
        let factors = self.cone.hessian_factors(&point)?;

        let mut e_last = vec![0.0; d + 1];
        e_last[d] = 1.0;
        let a_e_last = factors.apply_inv_sqrt(&e_last);
        let direction = sample_sphere_orthogonal(&a_e_last, rng)?;
        let mut step = factors.apply_inv_sqrt(&direction);

        // μ ⊥ A·e_{d+1} makes the slice coordinate of A·μ zero; force the
        // rounding residue to exactly zero so it cannot accumulate across
        // rounds of barrier evaluations.
        let lift_defect = step[d].abs();
        step[d] = 0.0;
        let dikin_norm = factors.local_norm(&step);
        let play: Vec<f64> = (0..d).map(|i| self.x[i] + step[i]).collect();

        self.pending = Some(Pending {
            factors,
            direction,
            play: play.clone(),
            dikin_norm,
            lift_defect,
        });
        Ok(play)
    }

    fn update(&mut self, loss: f64) -> Result<RoundRecord> {
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::invalid("no pending round; call act before update"))?;
        let d = self.params.dimension;

        if loss.abs() > self.max_abs_loss {
            self.max_abs_loss = loss.abs();
        }
        if loss.abs() > 1.0 + LOSS_BOUND_SLACK {
            self.breaches += 1;
        }

        let estimator = linalg::scaled(
            &pending.factors.apply_sqrt(&pending.direction),
            d as f64 * loss,
        );
        let estimator_dual_norm = pending.factors.dual_local_norm(&estimator);
        linalg::axpy(1.0, &estimator, &mut self.estimator_sum);

        let eta_used = self.current_eta();
        let linear = linalg::scaled(&self.estimator_sum, eta_used);
        let objective = FtrlObjective::new(&self.slice, &linear, self.params.delta)?;
        let solution = objective.minimize(&self.x)?;

        let mut displacement = linalg::sub(&solution.x, &self.x);
        displacement.push(0.0);
        let step_norm = pending.factors.local_norm(&displacement);

        if let Some(schedule) = &self.schedule {
            // Trigger on the step length measured at the new iterate.
            let mut new_point = solution.x.clone();
            new_point.push(1.0);
            if self.cone.local_norm(&new_point, &displacement)? > schedule.threshold {
                self.rate_exponent += 1;
            }
        }

        self.rounds += 1;
        let record = RoundRecord {
            round: self.rounds,
            iterate: self.lifted(),
            next_iterate: {
                let mut p = solution.x.clone();
                p.push(1.0);
                p
            },
            direction: pending.direction,
            play: pending.play,
            loss,
            estimator,
            dikin_norm: pending.dikin_norm,
            estimator_dual_norm,
            step_norm,
            lift_defect: pending.lift_defect,
            solver_iterations: solution.iterations,
            eta_used,
        };
        self.x = solution.x;
        Ok(record)
    }

    fn iterate(&self) -> Vec<f64> {
        self.lifted()
    }

    fn rounds_played(&self) -> usize {
        self.rounds
    }

    fn max_abs_loss(&self) -> f64 {
        self.max_abs_loss
    }

    fn loss_bound_breaches(&self) -> usize {
        self.breaches
    }
}
