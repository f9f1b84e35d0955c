//! End-to-end tests of the `scrible` binary: exit codes, file schemas, and
//! output determinism.

use std::path::Path;
use std::process::{Command, Output};

fn scrible(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scrible"))
        .args(args)
        .output()
        .expect("binary must run")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

/// Tag-balance well-formedness check, enough to catch any malformed markup
/// this chart writer could produce.
fn assert_well_formed_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        let after = &rest[open + 1..];
        let close = after.find('>').expect("unclosed '<'");
        let tag = &after[..close];
        assert!(!tag.is_empty(), "empty tag");
        if let Some(name) = tag.strip_prefix('/') {
            let top = stack.pop().expect("closing tag with no open element");
            assert_eq!(top, name.trim(), "mismatched closing tag");
        } else if !tag.ends_with('/') && !tag.starts_with('?') && !tag.starts_with('!') {
            let name = tag
                .split_whitespace()
                .next()
                .expect("tag with a name")
                .to_string();
            assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced attribute quotes");
            stack.push(name);
        }
        rest = &after[close + 1..];
    }
    assert!(stack.is_empty(), "unclosed elements: {stack:?}");
}

#[test]
fn usage_errors_exit_1() {
    let out = scrible(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let out = scrible(&["run", "--config"]);
    assert_eq!(out.status.code(), Some(1));
    let out = scrible(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn missing_config_exits_1_naming_the_path() {
    let out = scrible(&["run", "--config", "/nonexistent/exp.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/exp.cfg"), "{err}");
}

#[test]
fn unknown_config_key_exits_1_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "horizzon = 100\n").unwrap();
    let out = scrible(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizzon"));

    let out = scrible(&["run", "--set", "not-a-pair"]);
    assert_eq!(out.status.code(), Some(1));

    // Out-of-range values are config errors too, not runtime failures.
    let out = scrible(&["run", "--epsilon", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_passes_on_defaults_and_is_deterministic() {
    let args = ["validate", "--trials", "40", "--draws", "20000", "--seed", "3"];
    let a = scrible(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = scrible(&args);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("all 14 residuals within tolerance"));
}

#[test]
fn validate_with_corrupted_scale_exits_3() {
    let out = scrible(&[
        "validate",
        "--trials",
        "5",
        "--draws",
        "500",
        "--hook-barrier-scale",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_writes_csvs_with_the_documented_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let out = scrible(&[
        "run",
        "--preset",
        "section7",
        "--set",
        "horizon=200",
        "--epsilon",
        "0,0.5",
        "--algorithms",
        "lifted,classic",
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "round,algorithm,epsilon,repetition,loss,cum_loss,lin_regret,step_norm,g_dual_norm"
    );
    // 2 algorithms × 2 ε × 10 repetitions × 200 rounds.
    assert_eq!(lines.count(), 2 * 2 * 10 * 200);

    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algorithm,epsilon,repetition,final_cum_loss,final_lin_regret,bound_thm1,bound_thm2,max_abs_f"
    );
    let rows: Vec<&str> = lines.collect();
    // 10 repetitions per (algorithm, ε) cell.
    assert_eq!(rows.len(), 2 * 2 * 10);
    for (algorithm, epsilon) in [("lifted", "0"), ("classic", "5")] {
        let per_cell = rows
            .iter()
            .filter(|r| r.starts_with(&format!("{algorithm},{epsilon}")))
            .count();
        assert_eq!(per_cell, 10, "{algorithm} at ε prefix {epsilon}");
    }
}

#[test]
fn zero_loss_config_traces_are_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.cfg");
    std::fs::write(
        &cfg,
        "horizon = 50\nreps = 1\nepsilon = 0\nalgorithms = lifted\nnorm_cap = 0\nperturbation = zero\n",
    )
    .unwrap();
    let out = scrible(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    for line in trace.lines().skip(1) {
        let cum_loss = line.split(',').nth(5).unwrap();
        assert_eq!(cum_loss.parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn sweep_writes_table_and_well_formed_chart() {
    let dir = tempfile::tempdir().unwrap();
    let out = scrible(&[
        "sweep",
        "--preset",
        "section7",
        "--set",
        "horizon=60",
        "--reps",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let sweep = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algorithm,epsilon,mean_cum_loss,std_cum_loss,mean_lin_regret"
    );
    // 3 preset algorithms × 5 ε values.
    assert_eq!(lines.count(), 15);

    let svg = std::fs::read_to_string(dir.path().join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_well_formed_xml(&svg);
    // One polyline per algorithm.
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn lowerbound_prints_the_forced_gap() {
    let out = scrible(&["lowerbound", "--epsilon", "0.25", "--horizon", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("realized regret       = 50"), "{text}");
    assert!(text.contains("black-box gap         = 0.5"), "{text}");

    let out = scrible(&["lowerbound", "--epsilon", "0", "--horizon", "20"]);
    let text = stdout(&out);
    assert!(text.contains("realized regret       = 0"), "{text}");

    let out = scrible(&["lowerbound", "--epsilon", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_prints_delta_and_c() {
    let out = scrible(&["bounds"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("delta               = 2.500000000000e-7"), "{text}");
    assert!(text.contains("C                   = 22"), "{text}");

    let out = scrible(&["bounds", "--epsilon", "0.25"]);
    assert!(stdout(&out).contains("delta               = 5.000000000000e-1"));

    // GD = 1 degenerates the high-probability bound.
    let out = scrible(&["bounds", "--radius", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn xml_checker_rejects_malformed_markup() {
    assert_well_formed_xml("<a><b x=\"1\"/><c>text</c></a>");
    for bad in ["<a><b></a>", "<a>", "<a x=\"1></a>"] {
        assert!(
            std::panic::catch_unwind(|| assert_well_formed_xml(bad)).is_err(),
            "checker accepted {bad}"
        );
    }
}

#[test]
fn unwritable_output_exits_2() {
    let out = scrible(&[
        "run",
        "--set",
        "horizon=5",
        "--reps",
        "1",
        "--epsilon",
        "0",
        "--algorithms",
        "classic",
        "--out",
        "/dev/null/cannot-exist",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_outputs_are_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = scrible(&[
            "sweep",
            "--set",
            "horizon=40",
            "--reps",
            "2",
            "--epsilon",
            "0,0.5",
            "--algorithms",
            "lifted",
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "8",
        ]);
        assert_eq!(out.status.code(), Some(0));
        (
            std::fs::read(out_dir.join("sweep.csv")).unwrap(),
            std::fs::read(out_dir.join("sweep.svg")).unwrap(),
        )
    };
    let (csv_a, svg_a) = run("a");
    let (csv_b, svg_b) = run("b");
    assert_eq!(csv_a, csv_b);
    assert_eq!(svg_a, svg_b);
}

#[test]
fn out_directory_is_created_if_missing() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("a/b/c");
    let out = scrible(&[
        "run",
        "--set",
        "horizon=10",
        "--reps",
        "1",
        "--epsilon",
        "0",
        "--algorithms",
        "classic",
        "--out",
        nested.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(Path::new(&nested.join("summary.csv")).exists());
}
