//! The `scrible` command-line interface.
//!
//! Subcommands: `validate | run | sweep | lowerbound | bounds`. Exit codes:
//! 0 success, 1 usage or configuration error, 2 runtime or convergence
//! error, 3 validation failure.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use scrible_core::learner::{AlgorithmKind, EtaRule};

use crate::bounds;
use crate::chart;
use crate::config::{self, ConfigError};
use crate::csvio;
use crate::harness::{self, ExperimentConfig, NuMode, RegretReport};
use crate::validate::{run_validation, ValidateOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Parser)]
#[command(
    name = "scrible",
    version,
    about = "Bandit optimization simulator for approximately linear losses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the barrier identities and sampler statistics; exit 0 iff all
    /// residuals pass.
    Validate(ValidateArgs),
    /// Run the configured experiment and write trace.csv + summary.csv.
    Run(RunArgs),
    /// Run the ε-sweep and write sweep.csv + sweep.svg.
    Sweep(RunArgs),
    /// Drive a learner against the spike oracle and report the forced gap.
    Lowerbound(LowerboundArgs),
    /// Print the closed-form bound values and default parameters.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Seed for the random trial points and sampler draws.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of random interior points for the barrier suite.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Number of sampler draws for the statistical suite.
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    /// Test hook: override the barrier scale (normally 400).
    #[arg(long, hide = true, allow_hyphen_values = true)]
    hook_barrier_scale: Option<f64>,
    /// Test hook: override the inner barrier parameter (normally 1).
    #[arg(long, hide = true, allow_hyphen_values = true)]
    hook_inner_nu: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the CSV/SVG files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Base seed (repetition r runs with seed + r).
    #[arg(long)]
    seed: Option<u64>,
    /// Parameter preset: theorem | section7.
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated learners: lifted | classic | increasing_lr.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    /// Comma-separated ε grid (1.0 is clamped to 1 - 1e-9).
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<String>>,
    /// Repetitions per (algorithm, ε) cell.
    #[arg(long)]
    reps: Option<usize>,
    /// Which ν feeds the η formula and bounds: effective | literal.
    #[arg(long)]
    nu_mode: Option<String>,
    /// Extra KEY=VALUE config overrides (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct LowerboundArgs {
    /// Perturbation budget ε ∈ [0, 1).
    #[arg(long)]
    epsilon: f64,
    /// Number of oracle rounds.
    #[arg(long, default_value_t = 100)]
    horizon: usize,
    /// Learner to drive: lifted | classic | increasing_lr.
    #[arg(long, default_value = "lifted")]
    algorithm: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    dimension: usize,
    #[arg(long, default_value_t = 5.0)]
    radius: f64,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 2000)]
    horizon: usize,
    #[arg(long, default_value_t = 5)]
    dimension: usize,
    #[arg(long, default_value_t = 1.0)]
    norm_cap: f64,
    #[arg(long, default_value_t = 5.0)]
    radius: f64,
    /// Failure probability for the high-probability bound.
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// effective | literal.
    #[arg(long, default_value = "effective")]
    nu_mode: String,
    #[arg(long, default_value_t = 400.0)]
    barrier_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    barrier_inner_nu: f64,
    #[arg(long, default_value_t = 1.0)]
    literal_nu: f64,
    /// Accepted for interface uniformity; the output is deterministic.
    #[arg(long, default_value_t = 0)]
    #[allow(dead_code)]
    seed: u64,
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Run(args) => cmd_run(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Lowerbound(args) => cmd_lowerbound(&args),
        Command::Bounds(args) => cmd_bounds(&args),
    }
}

fn cmd_validate(args: &ValidateArgs) -> i32 {
    let opts = ValidateOptions {
        seed: args.seed,
        trials: args.trials,
        draws: args.draws,
        scale: args.hook_barrier_scale.unwrap_or(400.0),
        inner_nu: args.hook_inner_nu.unwrap_or(1.0),
        ..ValidateOptions::default()
    };
    let outcome = match run_validation(&opts) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("validation aborted: {err:#}");
            return EXIT_VALIDATION;
        }
    };
    println!("{:<55} {:>14} {:>10} {:>6}", "identity", "residual", "tol", "pass");
    for row in &outcome.rows {
        println!(
            "{:<55} {:>14.3e} {:>10.0e} {:>6}",
            row.name,
            row.value,
            row.tolerance,
            if row.pass() { "ok" } else { "FAIL" }
        );
    }
    if outcome.all_pass() {
        println!("all {} residuals within tolerance", outcome.rows.len());
        EXIT_OK
    } else {
        for row in outcome.failures() {
            eprintln!("validation failure: {} = {:.3e} (tol {:.0e})", row.name, row.value, row.tolerance);
        }
        EXIT_VALIDATION
    }
}

fn overrides_from(args: &RunArgs) -> std::result::Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    if let Some(preset) = &args.preset {
        pairs.push(("preset".to_string(), preset.clone()));
    }
    if let Some(seed) = args.seed {
        pairs.push(("seed".to_string(), seed.to_string()));
    }
    if let Some(algorithms) = &args.algorithms {
        pairs.push(("algorithms".to_string(), algorithms.join(",")));
    }
    if let Some(epsilon) = &args.epsilon {
        pairs.push(("epsilon".to_string(), epsilon.join(",")));
    }
    if let Some(reps) = args.reps {
        pairs.push(("reps".to_string(), reps.to_string()));
    }
    if let Some(nu_mode) = &args.nu_mode {
        pairs.push(("nu_mode".to_string(), nu_mode.clone()));
    }
    for kv in &args.set {
        let Some((key, value)) = kv.split_once('=') else {
            return Err(ConfigError(format!("--set expects KEY=VALUE, got '{kv}'")));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn load_run_config(args: &RunArgs) -> std::result::Result<ExperimentConfig, ConfigError> {
    let overrides = overrides_from(args)?;
    config::load(args.config.as_deref(), &overrides)
}

/// All runs of an experiment in deterministic (algorithm, ε, repetition)
/// order, with repetition indices attached.
fn collect_runs(config: &ExperimentConfig) -> Result<Vec<(usize, RegretReport)>> {
    let mut out = Vec::new();
    for &algorithm in &config.algorithms {
        for &epsilon in &config.epsilons {
            let reports = harness::run_repetitions(config, algorithm, epsilon)?;
            for (repetition, report) in reports.into_iter().enumerate() {
                out.push((repetition, report));
            }
        }
    }
    Ok(out)
}

fn print_run_notes(config: &ExperimentConfig, runs: &[(usize, RegretReport)]) {
    for &epsilon in &config.epsilons {
        let (clamped_eps, clamped) = harness::clamp_epsilon(epsilon);
        if clamped {
            eprintln!("note: epsilon {epsilon} clamped to {clamped_eps} (losses are 1-bounded only below 1)");
        }
        if let Ok(params) = config.params_for(clamped_eps) {
            if !params.step_guard_ok() {
                eprintln!(
                    "warning: epsilon {epsilon}: 4dη = {:.4} ≥ 1/2, step-locality bound not guaranteed",
                    params.step_bound()
                );
            }
        }
    }
    let max_abs_f = runs
        .iter()
        .map(|(_, r)| r.max_abs_f)
        .fold(0.0_f64, f64::max);
    let breaches: usize = runs.iter().map(|(_, r)| r.loss_bound_breaches).sum();
    if breaches > 0 {
        eprintln!(
            "warning: |f| exceeded 1 on {breaches} rounds (max |f| = {max_abs_f:.4}); the boundedness assumption did not hold empirically"
        );
    } else {
        eprintln!("note: realized max |f| = {max_abs_f:.4}");
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create output directory {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_run(args: &RunArgs) -> i32 {
    let config = match load_run_config(args) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("{err}");
            return EXIT_USAGE;
        }
    };
    let runs = match collect_runs(&config) {
        Ok(runs) => runs,
        Err(err) => {
            eprintln!("run failed: {err:#}");
            return EXIT_RUNTIME;
        }
    };
    let batch: Vec<(usize, &RegretReport)> = runs.iter().map(|(r, rep)| (*r, rep)).collect();

    let mut trace = Vec::new();
    let mut summary = Vec::new();
    if let Err(err) = csvio::write_trace(&mut trace, &batch)
        .and_then(|_| csvio::write_summary(&mut summary, &batch))
    {
        eprintln!("csv encoding failed: {err}");
        return EXIT_RUNTIME;
    }
    let trace_path = args.out.join("trace.csv");
    let summary_path = args.out.join("summary.csv");
    if let Err(err) = write_file(&trace_path, &trace).and_then(|_| write_file(&summary_path, &summary))
    {
        eprintln!("{err:#}");
        return EXIT_RUNTIME;
    }

    print_run_notes(&config, &runs);
    for (repetition, report) in &runs {
        println!(
            "algorithm={} epsilon={} repetition={} final_cum_loss={:.6} final_lin_regret={:.6} bound_thm1={:.6e}",
            report.algorithm.label(),
            report.requested_epsilon,
            repetition,
            report.final_cum_loss,
            report.final_lin_regret,
            report.bound_thm1,
        );
    }
    println!(
        "wrote {} and {}",
        trace_path.display(),
        summary_path.display()
    );
    EXIT_OK
}

fn cmd_sweep(args: &RunArgs) -> i32 {
    let config = match load_run_config(args) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("{err}");
            return EXIT_USAGE;
        }
    };
    let rows = match harness::sweep_epsilon(&config) {
        Ok(rows) => rows,
        Err(err) => {
            eprintln!("sweep failed: {err:#}");
            return EXIT_RUNTIME;
        }
    };

    let mut sweep_csv = Vec::new();
    if let Err(err) = csvio::write_sweep(&mut sweep_csv, &rows) {
        eprintln!("csv encoding failed: {err}");
        return EXIT_RUNTIME;
    }
    let svg = chart::sweep_chart(&rows);
    let csv_path = args.out.join("sweep.csv");
    let svg_path = args.out.join("sweep.svg");
    if let Err(err) =
        write_file(&csv_path, &sweep_csv).and_then(|_| write_file(&svg_path, svg.as_bytes()))
    {
        eprintln!("{err:#}");
        return EXIT_RUNTIME;
    }

    println!(
        "{:<14} {:>8} {:>16} {:>16} {:>16}",
        "algorithm", "epsilon", "mean_cum_loss", "std_cum_loss", "mean_lin_regret"
    );
    for row in &rows {
        println!(
            "{:<14} {:>8} {:>16.6} {:>16.6} {:>16.6}",
            row.algorithm.label(),
            row.epsilon,
            row.mean_cum_loss,
            row.std_cum_loss,
            row.mean_lin_regret
        );
    }
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    EXIT_OK
}

fn cmd_lowerbound(args: &LowerboundArgs) -> i32 {
    match lowerbound_inner(args) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("lowerbound failed: {err:#}");
            EXIT_RUNTIME
        }
    }
}

fn lowerbound_inner(args: &LowerboundArgs) -> Result<()> {
    if !(0.0..1.0).contains(&args.epsilon) {
        return Err(anyhow!("epsilon must lie in [0, 1)"));
    }
    let algorithm: AlgorithmKind = args.algorithm.parse().map_err(|e| anyhow!("{e}"))?;
    let report = harness::run_lowerbound(
        algorithm,
        args.dimension,
        args.radius,
        args.epsilon,
        args.horizon,
        args.seed,
    )?;
    println!("rounds                = {}", args.horizon);
    println!("per-round loss sum    = {}", report.per_round_loss_sum);
    println!("deferred optimum      = {}", report.deferred_optimum);
    println!("realized regret       = {}", report.realized_regret);
    println!("black-box gap         = {}", report.gap);
    Ok(())
}

fn cmd_bounds(args: &BoundsArgs) -> i32 {
    match bounds_inner(args) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("bounds failed: {err:#}");
            EXIT_RUNTIME
        }
    }
}

fn bounds_inner(args: &BoundsArgs) -> Result<()> {
    let nu_mode: NuMode = args.nu_mode.parse().map_err(|e: String| anyhow!(e))?;
    let nu = match nu_mode {
        NuMode::Effective => 2.0 * args.barrier_scale * args.barrier_inner_nu,
        NuMode::Literal => args.literal_nu,
    };
    let theorem = scrible_core::learner::default_params(
        args.epsilon,
        args.horizon,
        args.dimension,
        nu,
        args.norm_cap,
        args.radius,
        EtaRule::Theorem,
    )?;
    let section7 = scrible_core::learner::default_params(
        args.epsilon,
        args.horizon,
        args.dimension,
        nu,
        args.norm_cap,
        args.radius,
        EtaRule::Section7,
    )?;
    println!("nu                  = {nu:.12e}");
    println!("delta               = {:.12e}", theorem.delta);
    println!("eta (theorem rate)  = {:.12e}", theorem.eta);
    println!("eta (section7 rate) = {:.12e}", section7.eta);
    let thm1 = bounds::theorem1_bound(
        args.dimension,
        args.horizon,
        nu,
        theorem.delta,
        args.epsilon,
        args.norm_cap,
        args.radius,
    )?;
    println!("theorem1_bound      = {thm1:.12e}");
    let c = bounds::theorem2_c(args.norm_cap, args.radius, args.horizon)?;
    println!("C                   = {c}");
    let thm2 = bounds::theorem2_bound(
        args.dimension,
        args.horizon,
        nu,
        theorem.delta,
        args.epsilon,
        args.norm_cap,
        args.radius,
        args.gamma,
    )?;
    println!("theorem2_bound      = {thm2:.12e}");
    Ok(())
}
