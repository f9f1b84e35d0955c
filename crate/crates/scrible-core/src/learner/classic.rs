//! The unlifted original: Dikin-ellipsoid sampling directly on `K` with the
//! ball barrier, full-sphere directions in `R^d`, and the FTRL update over
//! `K_δ`. Kept as a baseline for the comparison experiments.

use alloc::{vec, vec::Vec};

use crate::barrier::{BallBarrier, HessianFactors};
use crate::error::{Error, Result};
use crate::ftrl::FtrlObjective;
use crate::geometry::{BallActionSet, ShrunkSet};
use crate::linalg;
use crate::sampling::{sample_unit_sphere, SeededRng};

use super::{
    AlgorithmKind, BanditLearner, BarrierConfig, LearnerParams, RoundRecord, LOSS_BOUND_SLACK,
};

struct Pending {
    factors: HessianFactors,
    direction: Vec<f64>,
    play: Vec<f64>,
    dikin_norm: f64,
}

/// Classic Dikin-ellipsoid sampling learner on the unlifted set.
pub struct ClassicScrible {
    barrier: BallBarrier,
    shrunk: ShrunkSet,
    params: LearnerParams,
    estimator_sum: Vec<f64>,
    x: Vec<f64>,
    pending: Option<Pending>,
    rounds: usize,
    max_abs_loss: f64,
    breaches: usize,
}

impl ClassicScrible {
    pub fn new(set: BallActionSet, params: LearnerParams, barrier: &BarrierConfig) -> Result<Self> {
        if set.dimension() != params.dimension {
            return Err(Error::DimensionMismatch {
                expected: params.dimension,
                got: set.dimension(),
            });
        }
        let shrunk = set.shrink(params.delta)?;
        let barrier = BallBarrier::with_scale(set, barrier.scale)?;
        let d = params.dimension;
        Ok(ClassicScrible {
            barrier,
            shrunk,
            params,
            estimator_sum: vec![0.0; d],
            x: vec![0.0; d],
            pending: None,
            rounds: 0,
            max_abs_loss: 0.0,
            breaches: 0,
        })
    }

    pub fn barrier(&self) -> &BallBarrier {
        &self.barrier
    }

    pub fn shrunk_set(&self) -> &ShrunkSet {
        &self.shrunk
    }
}

impl BanditLearner for ClassicScrible {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::Classic
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
        let factors = self.barrier.hessian_factors(&self.x)?;
        let direction = sample_unit_sphere(self.params.dimension, rng)?;
        let step = factors.apply_inv_sqrt(&direction);
        let dikin_norm = factors.local_norm(&step);
        let play = linalg::add(&self.x, &step);

        self.pending = Some(Pending {
            factors,
            direction,
            play: play.clone(),
            dikin_norm,
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

        let linear = linalg::scaled(&self.estimator_sum, self.params.eta);
        let objective = FtrlObjective::new(&self.barrier, &linear, self.params.delta)?;
        let solution = objective.minimize(&self.x)?;

        let displacement = linalg::sub(&solution.x, &self.x);
        let step_norm = pending.factors.local_norm(&displacement);

        self.rounds += 1;
        let record = RoundRecord {
            round: self.rounds,
            iterate: self.x.clone(),
            next_iterate: solution.x.clone(),
            direction: pending.direction,
            play: pending.play,
            loss,
            estimator,
            dikin_norm: pending.dikin_norm,
            estimator_dual_norm,
            step_norm,
            lift_defect: 0.0,
            solver_iterations: solution.iterations,
            eta_used: self.params.eta,
        };
        self.x = solution.x;
        Ok(record)
    }

    fn iterate(&self) -> Vec<f64> {
        self.x.clone()
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
