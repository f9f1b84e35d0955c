//! Approximately linear loss sequences.
//!
//! An oblivious adversary commits a sequence of linear vectors `θ_1..θ_T`
//! (each with `‖θ_t‖ ≤ G`) before the game, then adds a bounded perturbation
//! `σ_t(y_t)` with `|σ| ≤ ε` chosen *after* seeing the played point. The
//! spike oracle is the worst case for black-box optimization: it answers `ε`
//! on every query and hides a single `-ε` point nobody has visited, forcing
//! a `2ε` optimization gap for any algorithm whatsoever.

use alloc::{vec, vec::Vec};

use crate::error::{Error, Result};
use crate::geometry::BallActionSet;
use crate::linalg;
use crate::math;
use crate::sampling::{sample_unit_sphere, SeededRng};

/// An oblivious sequence of linear loss vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSequence {
    theta: Vec<Vec<f64>>,
    norm_cap: f64,
}

impl LinearSequence {
    /// Draws `horizon` vectors, each a uniform direction scaled by a uniform
    /// radius in `[0, G]`. The whole sequence is fixed here, before any
    /// learner interaction — that is what makes the adversary oblivious.
    pub fn generate(
        horizon: usize,
        dimension: usize,
        norm_cap: f64,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if dimension == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !(norm_cap >= 0.0) {
            return Err(Error::invalid("norm cap G must be nonnegative"));
        }
        let mut theta = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            if norm_cap == 0.0 {
                theta.push(vec![0.0; dimension]);
                continue;
            }
            let direction = sample_unit_sphere(dimension, rng)?;
            let radius = norm_cap * rng.uniform();
            theta.push(linalg::scaled(&direction, radius));
        }
        Ok(LinearSequence { theta, norm_cap })
    }

    /// Wraps explicit vectors, validating the norm cap.
    pub fn from_vectors(theta: Vec<Vec<f64>>, norm_cap: f64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::invalid("sequence must contain at least one vector"));
        }
        let dim = theta[0].len();
        for (t, v) in theta.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if linalg::norm(v) > norm_cap + 1e-12 {
                return Err(Error::invalid(alloc::format!(
                    "‖θ_{}‖ = {} exceeds the cap G = {norm_cap}",
                    t + 1,
                    linalg::norm(v)
                )));
            }
        }
        Ok(LinearSequence { theta, norm_cap })
    }

    pub fn horizon(&self) -> usize {
        self.theta.len()
    }

    pub fn dimension(&self) -> usize {
        self.theta[0].len()
    }

    pub fn norm_cap(&self) -> f64 {
        self.norm_cap
    }

    /// The vector for 1-based round `t`.
    pub fn theta(&self, t: usize) -> Result<&[f64]> {
        if t == 0 || t > self.theta.len() {
            return Err(Error::invalid(alloc::format!(
                "round {t} outside 1..={}",
                self.theta.len()
            )));
        }
        Ok(&self.theta[t - 1])
    }
}

/// The post-hoc perturbation `σ_t(y)`; every rule satisfies `|σ(y)| ≤ ε` on
/// all of `K` by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbationRule {
    /// `σ = 0` — plain bandit linear optimization.
    Zero,
    /// `σ(y) = ε·sin((yᵀl)·π)` for a fixed direction `l`.
    Sinusoidal { epsilon: f64, direction: Vec<f64> },
    /// `σ(y) = ε` everywhere.
    ConstantSign { epsilon: f64 },
    /// `σ(y) = ε·sign(θ_tᵀ(y - center))` — flips against the current linear
    /// loss; a worst-case-flavored rule (the sinusoidal one is not).
    AdversarialSign { epsilon: f64 },
}

impl PerturbationRule {
    /// Sinusoidal rule with `l` drawn once, entries uniform in
    /// `[-1/(D√d), 1/(D√d)]` so `|yᵀl| ≤ 1` over `K` keeps the sine inside
    /// one period.
    pub fn sinusoidal(epsilon: f64, set: &BallActionSet, rng: &mut SeededRng) -> Result<Self> {
        check_epsilon(epsilon)?;
        let d = set.dimension();
        let bound = 1.0 / (set.radius() * math::sqrt(d as f64));
        let direction = (0..d)
            .map(|_| bound * (2.0 * rng.uniform() - 1.0))
            .collect();
        Ok(PerturbationRule::Sinusoidal { epsilon, direction })
    }

    pub fn constant_sign(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(PerturbationRule::ConstantSign { epsilon })
    }

    pub fn adversarial_sign(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(PerturbationRule::AdversarialSign { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            PerturbationRule::Zero => 0.0,
            PerturbationRule::Sinusoidal { epsilon, .. }
            | PerturbationRule::ConstantSign { epsilon }
            | PerturbationRule::AdversarialSign { epsilon } => *epsilon,
        }
    }

    /// `σ_t(y)` for the played point `y` against the round's `θ_t`.
    pub fn perturb(&self, y: &[f64], theta_t: &[f64]) -> f64 {
        match self {
            PerturbationRule::Zero => 0.0,
            PerturbationRule::Sinusoidal { epsilon, direction } => {
                epsilon * math::sin(linalg::dot(y, direction) * core::f64::consts::PI)
            }
            PerturbationRule::ConstantSign { epsilon } => *epsilon,
            PerturbationRule::AdversarialSign { epsilon } => {
                epsilon * linalg::dot(theta_t, y).signum()
            }
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon must lie in [0, 1)"));
    }
    Ok(())
}

/// `f_t(y) = θ_tᵀy + σ_t(y)` for 1-based round `t`.
pub fn loss(
    sequence: &LinearSequence,
    rule: &PerturbationRule,
    t: usize,
    y: &[f64],
) -> Result<f64> {
    let theta_t = sequence.theta(t)?;
    if y.len() != theta_t.len() {
        return Err(Error::DimensionMismatch {
            expected: theta_t.len(),
            got: y.len(),
        });
    }
    Ok(linalg::dot(theta_t, y) + rule.perturb(y, theta_t))
}

/// The deferred-adversary spike function on `K`.
///
/// Every query is answered `ε` and logged. The hidden `-ε` point is resolved
/// only when the gap is evaluated, as a fresh interior point away from
/// everything that was ever queried — the adversary the randomized
/// lower-bound argument actually constructs.
#[derive(Debug, Clone)]
pub struct SpikeOracle {
    set: BallActionSet,
    epsilon: f64,
    queries: Vec<Vec<f64>>,
    hidden: Option<Vec<f64>>,
}

impl SpikeOracle {
    pub fn new(set: BallActionSet, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(SpikeOracle {
            set,
            epsilon,
            queries: Vec::new(),
            hidden: None,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn queries(&self) -> usize {
        self.queries.len()
    }

    /// The resolved hidden point, if [`gap`](Self::gap) has run.
    pub fn hidden_point(&self) -> Option<&[f64]> {
        self.hidden.as_deref()
    }

    /// Answers a query: always `ε`, and the point goes into the log.
    pub fn query(&mut self, x: &[f64]) -> Result<f64> {
        self.set.check_dimension(x)?;
        self.queries.push(x.to_vec());
        Ok(self.epsilon)
    }

    /// Resolves the hidden point `z ∉ log ∪ {x_hat}` and returns
    /// `f(x_hat) - min_{x ∈ K} f(x) = ε - (-ε) = 2ε` (computed as the exact
    /// product). Collisions with the log are redrawn; for the continuous set
    /// they have probability zero.
    pub fn gap(&mut self, x_hat: &[f64], rng: &mut SeededRng) -> Result<f64> {
        self.set.check_dimension(x_hat)?;
        if self.hidden.is_none() {
            let d = self.set.dimension();
            let mut resolved = None;
            for _ in 0..1000 {
                let direction = sample_unit_sphere(d, rng)?;
                // Uniform in the ball: radius ∝ U^{1/d}, kept strictly interior.
                let radius = 0.999
                    * self.set.radius()
                    * math::exp(math::ln(rng.uniform().max(f64::MIN_POSITIVE)) / d as f64);
                let z = linalg::scaled(&direction, radius);
                let collides = self
                    .queries
                    .iter()
                    .chain(core::iter::once(&x_hat.to_vec()))
                    .any(|q| linalg::norm(&linalg::sub(q, &z)) <= 1e-12);
                if !collides {
                    resolved = Some(z);
                    break;
                }
            }
            self.hidden = Some(resolved.ok_or_else(|| {
                Error::invalid("could not resolve a hidden point distinct from the query log")
            })?);
        }
        Ok(2.0 * self.epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set5() -> BallActionSet {
        BallActionSet::new(5, 5.0).unwrap()
    }

    #[test]
    fn generated_sequences_respect_the_cap_and_are_reproducible() {
        let mut rng = SeededRng::new(1);
        let seq = LinearSequence::generate(500, 5, 1.0, &mut rng).unwrap();
        for t in 1..=500 {
            assert!(linalg::norm(seq.theta(t).unwrap()) <= 1.0);
        }
        let mut rng2 = SeededRng::new(1);
        let seq2 = LinearSequence::generate(500, 5, 1.0, &mut rng2).unwrap();
        assert_eq!(seq, seq2);

        let mut rng3 = SeededRng::new(1);
        let zero = LinearSequence::generate(10, 5, 0.0, &mut rng3).unwrap();
        for t in 1..=10 {
            assert!(zero.theta(t).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn theta_indexing_is_one_based_and_range_checked() {
        let mut rng = SeededRng::new(2);
        let seq = LinearSequence::generate(3, 2, 1.0, &mut rng).unwrap();
        assert!(seq.theta(0).is_err());
        assert!(seq.theta(1).is_ok());
        assert!(seq.theta(3).is_ok());
        assert!(seq.theta(4).is_err());
    }

    #[test]
    fn sinusoidal_hits_the_textbook_values() {
        // yᵀl = 0.5 → sin(π/2) = 1; yᵀl = 1 → sin(π) = 0.
        let rule = PerturbationRule::Sinusoidal {
            epsilon: 0.3,
            direction: vec![1.0, 0.0],
        };
        let theta = [0.0, 0.0];
        assert!((rule.perturb(&[0.5, 0.0], &theta) - 0.3).abs() < 1e-15);
        assert!(rule.perturb(&[1.0, 0.0], &theta).abs() < 1e-12);
        assert_eq!(PerturbationRule::Zero.perturb(&[0.5, 0.0], &theta), 0.0);
    }

    #[test]
    fn every_rule_stays_within_epsilon() {
        let set = set5();
        let mut rng = SeededRng::new(3);
        let epsilon = 0.25;
        let rules = [
            PerturbationRule::Zero,
            PerturbationRule::sinusoidal(epsilon, &set, &mut rng).unwrap(),
            PerturbationRule::constant_sign(epsilon).unwrap(),
            PerturbationRule::adversarial_sign(epsilon).unwrap(),
        ];
        let theta = [0.3, -0.1, 0.0, 0.2, -0.4];
        for _ in 0..10_000 {
            let dir = sample_unit_sphere(5, &mut rng).unwrap();
            let y = linalg::scaled(&dir, 5.0 * rng.uniform());
            for rule in &rules {
                let sigma = rule.perturb(&y, &theta);
                assert!(
                    sigma.abs() <= rule.epsilon() + 1e-12,
                    "|σ| = {} exceeds ε for {rule:?}",
                    sigma.abs()
                );
            }
        }
    }

    #[test]
    fn epsilon_outside_unit_interval_is_rejected() {
        assert!(PerturbationRule::constant_sign(1.0).is_err());
        assert!(PerturbationRule::constant_sign(-0.1).is_err());
        assert!(SpikeOracle::new(set5(), 1.0).is_err());
    }

    #[test]
    fn loss_is_linear_part_plus_perturbation() {
        let seq = LinearSequence::from_vectors(vec![vec![1.0, 0.0]], 1.0).unwrap();
        let zero = PerturbationRule::Zero;
        assert!((loss(&seq, &zero, 1, &[0.3, 0.0]).unwrap() - 0.3).abs() < 1e-15);
        let constant = PerturbationRule::constant_sign(0.1).unwrap();
        assert!((loss(&seq, &constant, 1, &[0.3, 0.0]).unwrap() - 0.4).abs() < 1e-15);
        assert!(loss(&seq, &zero, 2, &[0.3, 0.0]).is_err());
        assert!(loss(&seq, &zero, 1, &[0.3]).is_err());
    }

    #[test]
    fn spike_oracle_always_answers_epsilon_and_logs() {
        let mut oracle = SpikeOracle::new(set5(), 0.25).unwrap();
        for i in 0..50 {
            assert_eq!(oracle.query(&[0.1 * i as f64 % 4.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), 0.25);
            assert_eq!(oracle.queries(), i + 1);
        }
        // Repeated identical query still answers ε.
        assert_eq!(oracle.query(&[0.0; 5]).unwrap(), 0.25);
        assert_eq!(oracle.query(&[0.0; 5]).unwrap(), 0.25);
    }

    #[test]
    fn spike_gap_is_exactly_two_epsilon() {
        let mut rng = SeededRng::new(4);
        for epsilon in [0.0, 0.1, 0.25] {
            let mut oracle = SpikeOracle::new(set5(), epsilon).unwrap();
            for _ in 0..20 {
                oracle.query(&[0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
            }
            let gap = oracle.gap(&[0.5, 0.0, 0.0, 0.0, 0.0], &mut rng).unwrap();
            assert_eq!(gap, 2.0 * epsilon);
            let z = oracle.hidden_point().unwrap().to_vec();
            assert!(set5().contains(&z).unwrap());
            // The hidden point avoids the log and the recommendation.
            assert!(linalg::norm(&linalg::sub(&z, &[0.5, 0.0, 0.0, 0.0, 0.0])) > 1e-12);
            // Resolving again keeps the same hidden point.
            oracle.gap(&[0.5, 0.0, 0.0, 0.0, 0.0], &mut rng).unwrap();
            assert_eq!(oracle.hidden_point().unwrap(), z.as_slice());
        }
    }
}
