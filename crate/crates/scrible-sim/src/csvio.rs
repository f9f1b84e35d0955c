//! CSV emission with fixed schemas.
//!
//! Column order is part of the interface and must not change:
//!
//! - `trace.csv`: round, algorithm, epsilon, repetition, loss, cum_loss,
//!   lin_regret, step_norm, g_dual_norm
//! - `summary.csv`: algorithm, epsilon, repetition, final_cum_loss,
//!   final_lin_regret, bound_thm1, bound_thm2, max_abs_f
//! - `sweep.csv`: algorithm, epsilon, mean_cum_loss, std_cum_loss,
//!   mean_lin_regret
//!
//! Floats print with 17 significant digits so identical runs produce
//! byte-identical files and values round-trip losslessly.

use std::io::{self, Write};

use crate::harness::{RegretReport, SweepRow};

/// 17 significant digits (1 leading + 16 fractional in scientific notation).
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub const TRACE_HEADER: &str =
    "round,algorithm,epsilon,repetition,loss,cum_loss,lin_regret,step_norm,g_dual_norm";
pub const SUMMARY_HEADER: &str =
    "algorithm,epsilon,repetition,final_cum_loss,final_lin_regret,bound_thm1,bound_thm2,max_abs_f";
pub const SWEEP_HEADER: &str = "algorithm,epsilon,mean_cum_loss,std_cum_loss,mean_lin_regret";

/// Writes per-round traces for a batch of runs. `reports` carries the
/// repetition index alongside each report.
pub fn write_trace(out: &mut impl Write, reports: &[(usize, &RegretReport)]) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for (repetition, report) in reports {
        for (i, record) in report.records.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                record.round,
                report.algorithm.label(),
                fmt_f64(report.requested_epsilon),
                repetition,
                fmt_f64(record.loss),
                fmt_f64(report.cum_loss[i]),
                fmt_f64(report.lin_regret[i]),
                fmt_f64(record.step_norm),
                fmt_f64(record.estimator_dual_norm),
            )?;
        }
    }
    Ok(())
}

pub fn write_summary(out: &mut impl Write, reports: &[(usize, &RegretReport)]) -> io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for (repetition, report) in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            report.algorithm.label(),
            fmt_f64(report.requested_epsilon),
            repetition,
            fmt_f64(report.final_cum_loss),
            fmt_f64(report.final_lin_regret),
            fmt_f64(report.bound_thm1),
            fmt_f64(report.bound_thm2.unwrap_or(f64::NAN)),
            fmt_f64(report.max_abs_f),
        )?;
    }
    Ok(())
}

pub fn write_sweep(out: &mut impl Write, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.algorithm.label(),
            fmt_f64(row.epsilon),
            fmt_f64(row.mean_cum_loss),
            fmt_f64(row.std_cum_loss),
            fmt_f64(row.mean_lin_regret),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_once, ExperimentConfig};
    use scrible_core::learner::AlgorithmKind;

    #[test]
    fn float_format_has_17_significant_digits_and_round_trips() {
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
        // 2.5e-7 is not a dyadic rational; 17 digits expose the actual f64.
        assert_eq!(fmt_f64(2.5e-7), "2.4999999999999999e-7");
        for v in [1.0 / 3.0, std::f64::consts::PI, -1.23456789e-12, 98636.125] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn csv_schemas_are_stable() {
        let mut config = ExperimentConfig::section7();
        config.horizon = 5;
        config.repetitions = 1;
        let report = run_once(&config, AlgorithmKind::Lifted, 0.25, 3).unwrap();
        let batch = [(0usize, &report)];

        let mut trace = Vec::new();
        write_trace(&mut trace, &batch).unwrap();
        let trace = String::from_utf8(trace).unwrap();
        let mut lines = trace.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(lines.count(), 5);
        for line in trace.lines().skip(1) {
            assert_eq!(line.split(',').count(), 9);
        }

        let mut summary = Vec::new();
        write_summary(&mut summary, &batch).unwrap();
        let summary = String::from_utf8(summary).unwrap();
        assert_eq!(summary.lines().next(), Some(SUMMARY_HEADER));
        assert_eq!(summary.lines().count(), 2);
        assert_eq!(summary.lines().nth(1).unwrap().split(',').count(), 8);
    }
}
