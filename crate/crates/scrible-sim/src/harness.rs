//! Experiment orchestration: single runs, seeded repetitions, ε-sweeps,
//! trace-invariant checks, and regret aggregation.
//!
//! A run is a pure function of `(config, algorithm, ε, seed)`: the adversary,
//! the learner, and the perturbation direction each draw from their own
//! substream, so repetitions can execute in parallel without sharing
//! generator state and the outputs are independent of scheduling.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use scrible_core::adversary::{self, LinearSequence, PerturbationRule};
use scrible_core::geometry::BallActionSet;
use scrible_core::learner::{
    build_learner, default_params, AlgorithmKind, BarrierConfig, EtaRule, LearnerParams,
    RoundRecord,
};
use scrible_core::linalg;
use scrible_core::sampling::SeededRng;
use scrible_core::barrier::{BallBarrier, ConeBarrier};

use crate::bounds;

/// Substream labels under a run seed.
const STREAM_ADVERSARY: u64 = 0;
const STREAM_LEARNER: u64 = 1;
/// The sinusoidal direction is drawn once per experiment (from the base
/// seed, not the run seed) so every cell of a sweep faces the same
/// perturbation landscape.
const STREAM_PERTURBATION: u64 = 2;

/// Confidence level used for the high-probability bound column in reports.
pub const REPORT_GAMMA: f64 = 0.1;

/// ε = 1 is clamped to this, just inside the admissible range.
pub const EPSILON_CLAMP: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Parameters from the regret theorems (`η = √(ν·ln(1/δ))/(2d√T)`).
    Theorem,
    /// The replication experiment: d=5, D=5, G=1, T=2000, 10 repetitions,
    /// sinusoidal perturbation, `η = 20√(ln(1/δ))/(4d√T)`, literal ν.
    Section7,
}

impl Preset {
    pub fn label(&self) -> &'static str {
        match self {
            Preset::Theorem => "theorem",
            Preset::Section7 => "section7",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "theorem" => Ok(Preset::Theorem),
            "section7" => Ok(Preset::Section7),
            other => Err(format!("unknown preset '{other}' (expected theorem | section7)")),
        }
    }
}

/// Which ν enters the learning-rate formula and the bound calculators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuMode {
    /// The barrier's true homogeneity parameter `2·c·n` (800 for defaults).
    Effective,
    /// The literal value from the experiment description (1 by default).
    Literal,
}

impl NuMode {
    pub fn label(&self) -> &'static str {
        match self {
            NuMode::Effective => "effective",
            NuMode::Literal => "literal",
        }
    }
}

impl std::str::FromStr for NuMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "effective" => Ok(NuMode::Effective),
            "literal" => Ok(NuMode::Literal),
            other => Err(format!("unknown nu mode '{other}' (expected effective | literal)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    Zero,
    Sinusoidal,
    ConstantSign,
    AdversarialSign,
}

impl PerturbationKind {
    pub fn label(&self) -> &'static str {
        match self {
            PerturbationKind::Zero => "zero",
            PerturbationKind::Sinusoidal => "sinusoidal",
            PerturbationKind::ConstantSign => "constant",
            PerturbationKind::AdversarialSign => "adversarial",
        }
    }
}

impl std::str::FromStr for PerturbationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero" => Ok(PerturbationKind::Zero),
            "sinusoidal" => Ok(PerturbationKind::Sinusoidal),
            "constant" => Ok(PerturbationKind::ConstantSign),
            "adversarial" => Ok(PerturbationKind::AdversarialSign),
            other => Err(format!(
                "unknown perturbation '{other}' (expected zero | sinusoidal | constant | adversarial)"
            )),
        }
    }
}

/// Full description of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub horizon: usize,
    pub radius: f64,
    pub norm_cap: f64,
    pub epsilons: Vec<f64>,
    pub algorithms: Vec<AlgorithmKind>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub perturbation: PerturbationKind,
    pub preset: Preset,
    pub nu_mode: NuMode,
    pub barrier: BarrierConfig,
    pub literal_nu: f64,
}

impl ExperimentConfig {
    /// Theorem-parameter defaults: effective ν, zero perturbation budget.
    pub fn theorem() -> Self {
        ExperimentConfig {
            dimension: 5,
            horizon: 2000,
            radius: 5.0,
            norm_cap: 1.0,
            epsilons: vec![0.0],
            algorithms: vec![AlgorithmKind::Lifted],
            repetitions: 10,
            base_seed: 1,
            perturbation: PerturbationKind::Sinusoidal,
            preset: Preset::Theorem,
            nu_mode: NuMode::Effective,
            barrier: BarrierConfig::default(),
            literal_nu: 1.0,
        }
    }

    /// The replication experiment preset.
    pub fn section7() -> Self {
        ExperimentConfig {
            epsilons: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            algorithms: AlgorithmKind::ALL.to_vec(),
            preset: Preset::Section7,
            nu_mode: NuMode::Literal,
            ..ExperimentConfig::theorem()
        }
    }

    pub fn for_preset(preset: Preset) -> Self {
        match preset {
            Preset::Theorem => ExperimentConfig::theorem(),
            Preset::Section7 => ExperimentConfig::section7(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.horizon == 0 {
            bail!("dimension and horizon must be at least 1");
        }
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        if self.epsilons.is_empty() {
            bail!("at least one epsilon is required");
        }
        for &e in &self.epsilons {
            if !(0.0..=1.0).contains(&e) {
                bail!("epsilon {e} outside [0, 1] (1.0 is accepted and clamped)");
            }
        }
        if self.algorithms.is_empty() {
            bail!("at least one algorithm is required");
        }
        BallActionSet::new(self.dimension, self.radius).context("invalid action set")?;
        if !(self.literal_nu >= 1.0) {
            bail!("literal_nu must be at least 1");
        }
        Ok(())
    }

    pub fn action_set(&self) -> Result<BallActionSet> {
        Ok(BallActionSet::new(self.dimension, self.radius)?)
    }

    /// The ν used in the η formula and the bound calculators.
    pub fn nu(&self) -> f64 {
        match self.nu_mode {
            NuMode::Effective => self.barrier.effective_nu(),
            NuMode::Literal => self.literal_nu,
        }
    }

    pub fn eta_rule(&self) -> EtaRule {
        match self.preset {
            Preset::Theorem => EtaRule::Theorem,
            Preset::Section7 => EtaRule::Section7,
        }
    }

    /// Learner parameters for one (clamped) ε.
    pub fn params_for(&self, epsilon: f64) -> Result<LearnerParams> {
        Ok(default_params(
            epsilon,
            self.horizon,
            self.dimension,
            self.nu(),
            self.norm_cap,
            self.radius,
            self.eta_rule(),
        )?)
    }

    /// The perturbation rule for one ε. The sinusoidal direction comes from
    /// the base seed, shared by every run of the experiment.
    pub fn perturbation_rule(&self, epsilon: f64, set: &BallActionSet) -> Result<PerturbationRule> {
        Ok(match self.perturbation {
            PerturbationKind::Zero => PerturbationRule::Zero,
            PerturbationKind::Sinusoidal => {
                if epsilon == 0.0 {
                    PerturbationRule::Zero
                } else {
                    let mut rng = SeededRng::new(self.base_seed).substream(STREAM_PERTURBATION);
                    PerturbationRule::sinusoidal(epsilon, set, &mut rng)?
                }
            }
            PerturbationKind::ConstantSign => {
                if epsilon == 0.0 {
                    PerturbationRule::Zero
                } else {
                    PerturbationRule::constant_sign(epsilon)?
                }
            }
            PerturbationKind::AdversarialSign => {
                if epsilon == 0.0 {
                    PerturbationRule::Zero
                } else {
                    PerturbationRule::adversarial_sign(epsilon)?
                }
            }
        })
    }
}

/// ε = 1 is admitted by the sweep grid but clamped before use.
pub fn clamp_epsilon(epsilon: f64) -> (f64, bool) {
    if epsilon >= 1.0 {
        (EPSILON_CLAMP, true)
    } else {
        (epsilon, false)
    }
}

/// Residuals of the per-trace invariants. Raw values; tolerances live with
/// the acceptance checks.
#[derive(Debug, Clone)]
pub struct InvariantReport {
    /// max over rounds of `‖y_t‖ - D` (≤ 0 means always feasible).
    pub feasibility_excess: f64,
    /// max over rounds of `|‖y'_t - x'_t‖_{x'_t} - 1|`.
    pub dikin_norm_error: f64,
    /// max over rounds of the relative error in
    /// `‖g_t‖*_{x'_t} = d·|f_t(y_t)|`.
    pub estimator_identity_error: f64,
    /// max |last coordinate of A_t·μ_t| before forcing.
    pub lift_defect: f64,
    /// max over rounds of `‖x'_{t+1} - x'_t‖_{x'_t}`.
    pub max_step_norm: f64,
    /// max over rounds with `4dη_t < 1/2` of `step_norm - 4dη_t`; `None` if
    /// the guard holds on no round.
    pub step_bound_excess: Option<f64>,
    /// FTRL inequality residual `lhs - rhs` against the shrunk lifted linear
    /// comparator (must be ≤ 1e-6·T). `None` for the varying-rate baseline,
    /// whose update is not plain FTRL.
    pub ftrl_residual: Option<f64>,
    /// max over rounds of
    /// `‖x'_t - h‖_{x'_t} - 2(1/δ - 1)(ν + 2√ν)` for the comparator `h`
    /// (lifted learners only; must be ≤ 0).
    pub comparator_norm_excess: Option<f64>,
    /// The comparator-norm bound value `2(1/δ - 1)(ν + 2√ν)`.
    pub comparator_norm_bound: f64,
    pub max_solver_iterations: usize,
}

/// Everything a single run produces.
#[derive(Debug, Clone)]
pub struct RegretReport {
    pub algorithm: AlgorithmKind,
    /// ε as requested (what sweep tables report).
    pub requested_epsilon: f64,
    /// ε actually used (clamped below 1).
    pub epsilon: f64,
    pub epsilon_clamped: bool,
    pub seed: u64,
    pub params: LearnerParams,
    pub nu_used: f64,
    /// Per-round records (plays, estimators, norms, solver stats).
    pub records: Vec<RoundRecord>,
    /// Running `Σ f_τ(y_τ)`.
    pub cum_loss: Vec<f64>,
    /// Running linearized regret `Σ θᵀy + D·‖Σθ‖` against the prefix
    /// comparator.
    pub lin_regret: Vec<f64>,
    pub final_cum_loss: f64,
    pub final_lin_regret: f64,
    /// `[lin - 2εT, lin + 2εT]`: the true regret against the linear
    /// comparator lies in this bracket (width exactly 4εT).
    pub regret_bracket: (f64, f64),
    pub max_abs_f: f64,
    pub loss_bound_breaches: usize,
    pub invariants: InvariantReport,
    pub bound_thm1: f64,
    /// `None` when GD ≤ 1 makes the high-probability bound degenerate.
    pub bound_thm2: Option<f64>,
    pub wall_secs: f64,
}

/// Executes the act → loss → update loop for one seeded run.
pub fn run_once(
    config: &ExperimentConfig,
    algorithm: AlgorithmKind,
    requested_epsilon: f64,
    seed: u64,
) -> Result<RegretReport> {
    config.validate()?;
    let start = Instant::now();
    let (epsilon, epsilon_clamped) = clamp_epsilon(requested_epsilon);
    let set = config.action_set()?;
    let params = config.params_for(epsilon)?;

    let root = SeededRng::new(seed);
    let mut adversary_rng = root.substream(STREAM_ADVERSARY);
    let mut learner_rng = root.substream(STREAM_LEARNER);

    let sequence = LinearSequence::generate(
        config.horizon,
        config.dimension,
        config.norm_cap,
        &mut adversary_rng,
    )?;
    let rule = config.perturbation_rule(epsilon, &set)?;
    let mut learner = build_learner(algorithm, &set, params.clone(), &config.barrier)?;

    let mut records = Vec::with_capacity(config.horizon);
    let mut cum_loss_trace = Vec::with_capacity(config.horizon);
    let mut lin_regret_trace = Vec::with_capacity(config.horizon);
    let mut cum_loss = 0.0;
    let mut lin_play = 0.0;
    let mut theta_sum = vec![0.0; config.dimension];

    for t in 1..=config.horizon {
        let play = learner
            .act(&mut learner_rng)
            .with_context(|| format!("round {t}: act failed"))?;
        let loss = adversary::loss(&sequence, &rule, t, &play)?;
        let record = learner
            .update(loss)
            .with_context(|| format!("round {t}: update failed"))?;

        cum_loss += loss;
        let theta_t = sequence.theta(t)?;
        lin_play += linalg::dot(theta_t, &play);
        linalg::axpy(1.0, theta_t, &mut theta_sum);
        cum_loss_trace.push(cum_loss);
        lin_regret_trace.push(lin_play + config.radius * linalg::norm(&theta_sum));
        records.push(record);
    }

    let final_lin_regret = *lin_regret_trace.last().expect("horizon ≥ 1");
    let slack = 2.0 * epsilon * config.horizon as f64;
    let invariants = check_invariants(config, algorithm, &params, &set, &records, &theta_sum)?;

    let nu_used = config.nu();
    let bound_thm1 = bounds::theorem1_bound(
        config.dimension,
        config.horizon,
        nu_used,
        params.delta,
        epsilon,
        config.norm_cap,
        config.radius,
    )?;
    let bound_thm2 = bounds::theorem2_bound(
        config.dimension,
        config.horizon,
        nu_used,
        params.delta,
        epsilon,
        config.norm_cap,
        config.radius,
        REPORT_GAMMA,
    )
    .ok();

    Ok(RegretReport {
        algorithm,
        requested_epsilon,
        epsilon,
        epsilon_clamped,
        seed,
        params,
        nu_used,
        final_cum_loss: cum_loss,
        final_lin_regret,
        regret_bracket: (final_lin_regret - slack, final_lin_regret + slack),
        max_abs_f: learner.max_abs_loss(),
        loss_bound_breaches: learner.loss_bound_breaches(),
        records,
        cum_loss: cum_loss_trace,
        lin_regret: lin_regret_trace,
        invariants,
        bound_thm1,
        bound_thm2,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

fn check_invariants(
    config: &ExperimentConfig,
    algorithm: AlgorithmKind,
    params: &LearnerParams,
    set: &BallActionSet,
    records: &[RoundRecord],
    theta_sum: &[f64],
) -> Result<InvariantReport> {
    let d = config.dimension as f64;
    let lifted = matches!(
        algorithm,
        AlgorithmKind::Lifted | AlgorithmKind::IncreasingLr
    );

    let mut feasibility_excess = f64::NEG_INFINITY;
    let mut dikin_norm_error: f64 = 0.0;
    let mut estimator_identity_error: f64 = 0.0;
    let mut lift_defect: f64 = 0.0;
    let mut max_step_norm: f64 = 0.0;
    let mut step_bound_excess: Option<f64> = None;
    let mut max_solver_iterations = 0;

    for record in records {
        feasibility_excess =
            feasibility_excess.max(linalg::norm(&record.play) - config.radius);
        dikin_norm_error = dikin_norm_error.max((record.dikin_norm - 1.0).abs());
        let expected_dual = d * record.loss.abs();
        estimator_identity_error = estimator_identity_error.max(
            (record.estimator_dual_norm - expected_dual).abs() / expected_dual.max(1e-12),
        );
        lift_defect = lift_defect.max(record.lift_defect);
        max_step_norm = max_step_norm.max(record.step_norm);
        max_solver_iterations = max_solver_iterations.max(record.solver_iterations);

        let bound = 4.0 * d * record.eta_used;
        if bound < 0.5 {
            let excess = record.step_norm - bound;
            step_bound_excess =
                Some(step_bound_excess.map_or(excess, |prev: f64| prev.max(excess)));
        }
    }

    // Comparator: the linear optimum pulled into K_δ (radially, since the
    // optimum sits on the sphere), lifted when the learner is lifted. The
    // barrier is infinite on ∂K, so FTRL-style inequalities are stated
    // against shrunk comparators.
    let x_star = set.linear_optimum(theta_sum)?;
    let h_spatial = linalg::scaled(&x_star, 1.0 - params.delta);

    let slice = BallBarrier::with_scale(set.clone(), config.barrier.scale)?;
    let ftrl_residual = match algorithm {
        AlgorithmKind::IncreasingLr => None,
        _ => {
            let h_full = if lifted {
                let mut h = h_spatial.clone();
                h.push(1.0);
                h
            } else {
                h_spatial.clone()
            };
            let mut lhs_play = 0.0;
            let mut rhs_steps = 0.0;
            let mut estimator_total = vec![0.0; h_full.len()];
            for record in records {
                let g_dot_x = linalg::dot(&record.estimator, &record.iterate);
                lhs_play += g_dot_x;
                rhs_steps += g_dot_x - linalg::dot(&record.estimator, &record.next_iterate);
                linalg::axpy(1.0, &record.estimator, &mut estimator_total);
            }
            let lhs = lhs_play - linalg::dot(&estimator_total, &h_full);
            // x'_1 is the center, where the barrier value is 0; keep the
            // evaluation anyway in case the initialization changes.
            let r_start = slice.value(&vec![0.0; config.dimension])?;
            let rhs = rhs_steps + (slice.value(&h_spatial)? - r_start) / params.eta;
            Some(lhs - rhs)
        }
    };

    let nu_eff = config.barrier.effective_nu();
    let comparator_norm_bound =
        2.0 * (1.0 / params.delta - 1.0) * (nu_eff + 2.0 * nu_eff.sqrt());
    let comparator_norm_excess = if lifted {
        let cone = ConeBarrier::with_parameters(
            set.clone(),
            config.barrier.scale,
            config.barrier.inner_nu,
        )?;
        let mut h = h_spatial.clone();
        h.push(1.0);
        let mut worst = f64::NEG_INFINITY;
        for record in records {
            let diff = linalg::sub(&record.iterate, &h);
            let norm = cone.local_norm(&record.iterate, &diff)?;
            worst = worst.max(norm - comparator_norm_bound);
        }
        Some(worst)
    } else {
        None
    };

    Ok(InvariantReport {
        feasibility_excess,
        dikin_norm_error,
        estimator_identity_error,
        lift_defect,
        max_step_norm,
        step_bound_excess,
        ftrl_residual,
        comparator_norm_excess,
        comparator_norm_bound,
        max_solver_iterations,
    })
}

/// Seeded repetitions of one cell, in parallel. Repetition `r` runs with
/// seed `base_seed + r`.
pub fn run_repetitions(
    config: &ExperimentConfig,
    algorithm: AlgorithmKind,
    epsilon: f64,
) -> Result<Vec<RegretReport>> {
    (0..config.repetitions)
        .into_par_iter()
        .map(|r| run_once(config, algorithm, epsilon, config.base_seed + r as u64))
        .collect()
}

/// One row of the ε-sweep table.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub algorithm: AlgorithmKind,
    pub epsilon: f64,
    pub mean_cum_loss: f64,
    pub std_cum_loss: f64,
    pub mean_lin_regret: f64,
}

/// Runs `repetitions` seeded runs per (algorithm, ε) cell and aggregates
/// mean and sample standard deviation of the final cumulative loss.
pub fn sweep_epsilon(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let mut cells = Vec::new();
    for &algorithm in &config.algorithms {
        for &epsilon in &config.epsilons {
            cells.push((algorithm, epsilon));
        }
    }
    let mut triples = Vec::new();
    for &(algorithm, epsilon) in &cells {
        for r in 0..config.repetitions {
            triples.push((algorithm, epsilon, config.base_seed + r as u64));
        }
    }
    let reports: Result<Vec<RegretReport>> = triples
        .par_iter()
        .map(|&(algorithm, epsilon, seed)| run_once(config, algorithm, epsilon, seed))
        .collect();
    let reports = reports?;

    let mut rows = Vec::with_capacity(cells.len());
    for (i, &(algorithm, epsilon)) in cells.iter().enumerate() {
        let cell = &reports[i * config.repetitions..(i + 1) * config.repetitions];
        let losses: Vec<f64> = cell.iter().map(|r| r.final_cum_loss).collect();
        let regrets: Vec<f64> = cell.iter().map(|r| r.final_lin_regret).collect();
        rows.push(SweepRow {
            algorithm,
            epsilon,
            mean_cum_loss: mean(&losses),
            std_cum_loss: sample_std(&losses),
            mean_lin_regret: mean(&regrets),
        });
    }
    Ok(rows)
}

/// Outcome of driving a learner against the spike oracle.
#[derive(Debug, Clone)]
pub struct LowerboundReport {
    /// `Σ_t f(y_t) = ε·T` (exact product; every feedback is the same ε).
    pub per_round_loss_sum: f64,
    /// `T·min_x f(x) = -ε·T` for the deferred hidden point.
    pub deferred_optimum: f64,
    /// `2·ε·T`.
    pub realized_regret: f64,
    /// Black-box gap `f(x̂) - min_x f(x) = 2ε` at the recommended point.
    pub gap: f64,
    pub recommendation: Vec<f64>,
}

/// Runs a learner for `horizon` rounds against the spike oracle and
/// evaluates the forced gap at the recommended point.
pub fn run_lowerbound(
    algorithm: AlgorithmKind,
    dimension: usize,
    radius: f64,
    epsilon: f64,
    horizon: usize,
    seed: u64,
) -> Result<LowerboundReport> {
    use scrible_core::adversary::SpikeOracle;
    use scrible_core::learner::recommend;

    let set = BallActionSet::new(dimension, radius)?;
    let barrier = BarrierConfig::default();
    // The oracle answers ε regardless; the learner's own ε parameter only
    // sets (η, δ).
    let params = default_params(
        epsilon,
        horizon,
        dimension,
        barrier.effective_nu(),
        1.0,
        radius,
        EtaRule::Theorem,
    )?;
    let mut learner = build_learner(algorithm, &set, params, &barrier)?;
    let mut oracle = SpikeOracle::new(set, epsilon)?;
    let mut rng = SeededRng::new(seed).substream(STREAM_LEARNER);

    let mut records = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let play = learner
            .act(&mut rng)
            .with_context(|| format!("round {t}: act failed"))?;
        let loss = oracle.query(&play)?;
        if loss != epsilon {
            bail!("oracle returned {loss}, expected {epsilon}");
        }
        records.push(
            learner
                .update(loss)
                .with_context(|| format!("round {t}: update failed"))?,
        );
    }
    let recommendation = recommend(&records)?;
    let gap = oracle.gap(&recommendation, &mut rng)?;
    let t = horizon as f64;
    Ok(LowerboundReport {
        per_round_loss_sum: epsilon * t,
        deferred_optimum: -epsilon * t,
        realized_regret: 2.0 * epsilon * t,
        gap,
        recommendation,
    })
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two
/// values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Least-squares slope of `ln(regret)` against `ln(horizon)`.
pub fn fit_scaling_exponent(horizons: &[f64], mean_regrets: &[f64]) -> Result<f64> {
    if horizons.len() != mean_regrets.len() {
        bail!(
            "horizons and regrets must have equal length ({} vs {})",
            horizons.len(),
            mean_regrets.len()
        );
    }
    if horizons.len() < 3 {
        bail!("scaling fit needs at least 3 horizons");
    }
    for (&t, &r) in horizons.iter().zip(mean_regrets) {
        if !(t > 0.0) {
            bail!("horizon {t} must be positive");
        }
        if !(r > 0.0) {
            bail!("regret {r} must be positive for the log-log fit");
        }
    }
    let xs: Vec<f64> = horizons.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = mean_regrets.iter().map(|r| r.ln()).collect();
    let mx = mean(&xs);
    let my = mean(&ys);
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        bail!("horizons are all equal; slope undefined");
    }
    Ok(num / den)
}

/// Nearest-rank order-statistic quantile of values.
pub fn quantile_nearest_rank(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        bail!("quantile of an empty sample");
    }
    if !(q > 0.0 && q < 1.0) {
        bail!("quantile level must lie in (0, 1)");
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).max(1);
    Ok(sorted[rank - 1])
}

/// Nearest-rank quantile of the final linearized regrets of a batch of runs.
pub fn empirical_quantile(reports: &[RegretReport], q: f64) -> Result<f64> {
    let regrets: Vec<f64> = reports.iter().map(|r| r.final_lin_regret).collect();
    quantile_nearest_rank(&regrets, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            horizon: 40,
            repetitions: 2,
            ..ExperimentConfig::section7()
        }
    }

    #[test]
    fn run_once_is_deterministic() {
        let config = tiny_config();
        let a = run_once(&config, AlgorithmKind::Lifted, 0.25, 7).unwrap();
        let b = run_once(&config, AlgorithmKind::Lifted, 0.25, 7).unwrap();
        assert_eq!(a.final_cum_loss, b.final_cum_loss);
        assert_eq!(a.final_lin_regret, b.final_lin_regret);
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.play, rb.play);
            assert_eq!(ra.loss, rb.loss);
        }
    }

    #[test]
    fn zero_norm_cap_and_zero_perturbation_give_zero_losses() {
        let mut config = tiny_config();
        config.norm_cap = 0.0;
        config.perturbation = PerturbationKind::Zero;
        let report = run_once(&config, AlgorithmKind::Lifted, 0.0, 3).unwrap();
        assert_eq!(report.final_cum_loss, 0.0);
        assert_eq!(report.final_lin_regret, 0.0);
        assert!(report.cum_loss.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn epsilon_one_is_clamped() {
        let config = tiny_config();
        let report = run_once(&config, AlgorithmKind::Lifted, 1.0, 3).unwrap();
        assert!(report.epsilon_clamped);
        assert_eq!(report.epsilon, EPSILON_CLAMP);
        assert_eq!(report.requested_epsilon, 1.0);
    }

    #[test]
    fn bracket_width_is_4_epsilon_t() {
        let config = tiny_config();
        let report = run_once(&config, AlgorithmKind::Lifted, 0.25, 3).unwrap();
        let width = report.regret_bracket.1 - report.regret_bracket.0;
        assert!((width - 4.0 * 0.25 * 40.0).abs() < 1e-12);
    }

    #[test]
    fn repetitions_use_consecutive_seeds() {
        let config = tiny_config();
        let reports = run_repetitions(&config, AlgorithmKind::Classic, 0.0).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].seed, config.base_seed);
        assert_eq!(reports[1].seed, config.base_seed + 1);
        assert_ne!(reports[0].final_cum_loss, reports[1].final_cum_loss);
    }

    #[test]
    fn sweep_produces_one_row_per_cell_in_order() {
        let mut config = tiny_config();
        config.epsilons = vec![0.0, 0.5];
        config.algorithms = vec![AlgorithmKind::Lifted, AlgorithmKind::Classic];
        let rows = sweep_epsilon(&config).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].algorithm, AlgorithmKind::Lifted);
        assert_eq!(rows[0].epsilon, 0.0);
        assert_eq!(rows[3].algorithm, AlgorithmKind::Classic);
        assert_eq!(rows[3].epsilon, 0.5);
    }

    #[test]
    fn single_repetition_reports_zero_std() {
        let mut config = tiny_config();
        config.repetitions = 1;
        config.epsilons = vec![0.0];
        config.algorithms = vec![AlgorithmKind::Lifted];
        let rows = sweep_epsilon(&config).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].std_cum_loss, 0.0);
    }

    #[test]
    fn scaling_fit_recovers_exact_power_laws() {
        let horizons = [500.0_f64, 2000.0, 8000.0];
        let sqrt: Vec<f64> = horizons.iter().map(|t| 3.0 * t.sqrt()).collect();
        let slope = fit_scaling_exponent(&horizons, &sqrt).unwrap();
        assert!((slope - 0.5).abs() <= 1e-12);

        let lin: Vec<f64> = horizons.iter().map(|t| 0.1 * t).collect();
        let slope = fit_scaling_exponent(&horizons, &lin).unwrap();
        assert!((slope - 1.0).abs() <= 1e-12);

        assert!(fit_scaling_exponent(&horizons[..2], &sqrt[..2]).is_err());
        assert!(fit_scaling_exponent(&horizons, &[1.0, -1.0, 2.0]).is_err());
    }

    #[test]
    fn nearest_rank_quantile_matches_the_definition() {
        assert_eq!(quantile_nearest_rank(&[1.0, 2.0, 3.0], 0.5).unwrap(), 2.0);
        assert_eq!(quantile_nearest_rank(&[3.0, 1.0, 2.0], 0.9).unwrap(), 3.0);
        assert_eq!(quantile_nearest_rank(&[5.0], 0.1).unwrap(), 5.0);
        assert_eq!(quantile_nearest_rank(&[5.0], 0.99).unwrap(), 5.0);
        assert!(quantile_nearest_rank(&[], 0.5).is_err());
    }

    #[test]
    fn config_validation_rejects_bad_grids() {
        let mut config = tiny_config();
        config.epsilons = vec![1.5];
        assert!(config.validate().is_err());
        config.epsilons = vec![];
        assert!(config.validate().is_err());
        let mut config = tiny_config();
        config.repetitions = 0;
        assert!(config.validate().is_err());
    }
}
