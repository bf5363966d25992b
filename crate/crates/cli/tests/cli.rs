//! End-to-end tests of the `crossclass` binary: output lines, exit codes,
//! format round trips, and ingestion-path equivalence.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crossclass_cli::report::Report;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossclass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_temp(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn event_bounds_on_bridging_fixture() {
    let out = run(&["bounds", "event", "--scenario", &fixture("appendix-c.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("P(y=1|x=Hispanic) \u{2208} [0.0909, 0.3896]"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn event_bounds_on_subgroup_fixture_all_targets() {
    let out = run(&[
        "bounds",
        "event",
        "--scenario",
        &fixture("asian-subgroups.json"),
        "--all-targets",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in [
        "P(y=1|x=Chinese) \u{2208} [0.0000, 0.3932]",
        "P(y=1|x=Filipino) \u{2208} [0.0000, 0.4547]",
        "P(y=1|x=AsianIndian) \u{2208} [0.0000, 0.4067]",
        "P(y=1|x=OtherAsian) \u{2208} [0.0000, 0.2492]",
    ] {
        assert!(text.contains(line), "missing '{line}' in:\n{text}");
    }
}

#[test]
fn bundled_fixture_names_resolve_without_paths() {
    let out = run(&["bounds", "event", "--scenario", "appendix-c"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("[0.0909, 0.3896]"));
}

#[test]
fn fixtures_dir_override_is_respected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("appendix-c.json"),
        std::fs::read_to_string(fixture("appendix-c.json"))
            .unwrap()
            .replace("\"Hispanic\"", "\"Renamed\""),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_crossclass"))
        .env("CROSSCLASS_FIXTURES", dir.path())
        .args(["bounds", "event", "--scenario", "appendix-c"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("x=Renamed"), "{}", stdout(&out));
}

#[test]
fn closed_form_and_lp_methods_agree() {
    let text_of = |method: &str| {
        let out = run(&[
            "bounds",
            "event",
            "--scenario",
            &fixture("appendix-c.json"),
            "--method",
            method,
        ]);
        assert_eq!(out.status.code(), Some(0));
        // Strip the method=... suffix before comparing.
        stdout(&out)
            .lines()
            .filter(|l| l.contains('\u{2208}'))
            .map(|l| l.split("  ").next().unwrap().to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(text_of("closed-form"), text_of("lp"));
}

#[test]
fn csv_and_embedded_counts_agree() {
    let base = run(&[
        "bounds",
        "event",
        "--scenario",
        &fixture("table1-bridging.json"),
        "--target",
        "Hispanic",
    ]);
    let via_csv = run(&[
        "bounds",
        "event",
        "--scenario",
        &fixture("table1-bridging.json"),
        "--wx-csv",
        &fixture("table1.csv"),
        "--target",
        "Hispanic",
    ]);
    assert_eq!(base.status.code(), Some(0));
    assert_eq!(via_csv.status.code(), Some(0));
    assert_eq!(stdout(&base), stdout(&via_csv));
}

#[test]
fn json_output_round_trips_byte_identically() {
    let out = run(&[
        "bounds",
        "event",
        "--scenario",
        &fixture("appendix-c.json"),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rendered = stdout(&out);
    let report: Report = serde_json::from_str(&rendered).unwrap();
    let mut rerendered = serde_json::to_string_pretty(&report).unwrap();
    rerendered.push('\n');
    assert_eq!(rendered, rerendered);
}

#[test]
fn validation_failure_lists_violations_and_exits_1() {
    let f = write_temp(
        r#"{"schema_version": 1, "w_labels": ["a", "b"], "x_labels": ["A", "B"],
            "y_support": [0, 1], "y_given_w": [[0.8, 0.1], [0.5, 0.5]],
            "wx": {"joint": [[0.4, 0.1], [0.1, 0.4]]}}"#,
    );
    let out = run(&["validate", "--scenario", &f.path().to_string_lossy()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not normalized"), "{}", stderr(&out));
}

#[test]
fn empty_scenario_file_exits_1() {
    let f = write_temp("");
    let out = run(&["validate", "--scenario", &f.path().to_string_lossy()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn valid_fixture_validates_cleanly() {
    for name in ["appendix-c", "asian-subgroups", "table1-bridging"] {
        let out = run(&["validate", "--scenario", name]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        assert!(stdout(&out).starts_with("OK"));
    }
}

#[test]
fn infeasible_caps_exit_2() {
    let f = write_temp(
        r#"{"schema_version": 1, "w_labels": ["A", "B"], "x_labels": ["A", "B"],
            "y_support": [0, 1], "y_given_w": [[0.1, 0.9], [0.9, 0.1]],
            "wx": {"joint": [[0.25, 0.25], [0.25, 0.25]]}}"#,
    );
    let out = run(&[
        "bounds",
        "event",
        "--scenario",
        &f.path().to_string_lossy(),
        "--target",
        "A",
        "--bv",
        "A=0",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("too tight"));
}

#[test]
fn usage_errors_exit_3() {
    let out = run(&[
        "bounds",
        "event",
        "--scenario",
        "appendix-c",
        "--no-such-flag",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&[
        "bounds",
        "event",
        "--scenario",
        "appendix-c",
        "--target",
        "Zork",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&[
        "bounds",
        "quantile",
        "--scenario",
        "appendix-c",
        "--alpha",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn oracle_check_agrees_on_bridging_fixture() {
    let out = run(&[
        "oracle",
        "check",
        "--scenario",
        "appendix-c",
        "--step",
        "0.005",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("agree"), "{}", stdout(&out));
}

#[test]
fn fixtures_list_names_everything_bundled() {
    let out = run(&["fixtures", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["appendix-c", "asian-subgroups", "table1-bridging"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn mean_and_quantile_commands_run_on_general_outcomes() {
    let f = write_temp(
        r#"{"schema_version": 1, "w_labels": ["u", "v"], "x_labels": ["A", "B"],
            "y_support": [1, 2, 3],
            "y_given_w": [[0.5, 0.3, 0.2], [0.2, 0.3, 0.5]],
            "wx": {"joint": [[0.3, 0.1], [0.1, 0.5]]}}"#,
    );
    let path = f.path().to_string_lossy().into_owned();
    let mean = run(&["bounds", "mean", "--scenario", &path, "--all-targets"]);
    assert_eq!(mean.status.code(), Some(0), "{}", stderr(&mean));
    assert!(stdout(&mean).contains("E(y|x=A)"));
    let quant = run(&[
        "bounds",
        "quantile",
        "--scenario",
        &path,
        "--alpha",
        "0.5",
        "--all-targets",
    ]);
    assert_eq!(quant.status.code(), Some(0), "{}", stderr(&quant));
    let text = stdout(&quant);
    assert!(text.contains("Q_0.50(y|x=A)"), "{text}");
    assert!(text.contains("feasible values"), "{text}");
}

#[test]
fn marginals_scenario_reports_grid_metadata() {
    let f = write_temp(
        r#"{"schema_version": 1, "w_labels": ["w0", "w1"], "x_labels": ["x0", "x1"],
            "y_support": [0, 1], "y_given_w": [[0.7, 0.3], [0.3, 0.7]],
            "wx": {"marginals": {"pw": [0.6, 0.4], "px": [0.5, 0.5]}},
            "target_x": "x1"}"#,
    );
    let out = run(&[
        "bounds",
        "event",
        "--scenario",
        &f.path().to_string_lossy(),
        "--grid-n",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("union of 11 points"), "{text}");
    assert!(text.contains("method=grid-union"), "{text}");
}

#[test]
fn candidates_scenario_unions_over_the_set() {
    let f = write_temp(
        r#"{"schema_version": 1, "w_labels": ["w0", "w1"], "x_labels": ["x0", "x1"],
            "y_support": [0, 1], "y_given_w": [[0.7, 0.3], [0.3, 0.7]],
            "wx": {"candidates": [[[0.4, 0.2], [0.1, 0.3]], [[0.2, 0.4], [0.3, 0.1]]]}}"#,
    );
    let out = run(&[
        "bounds",
        "event",
        "--scenario",
        &f.path().to_string_lossy(),
        "--target",
        "x1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("union of 2 points"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn probability_and_count_joints_give_identical_output() {
    // Dyadic counts so the probability form is exactly representable.
    let counts = write_temp(
        r#"{"schema_version": 1, "w_labels": ["u", "v"], "x_labels": ["A", "B"],
            "y_support": [0, 1], "y_given_w": [[0.7, 0.3], [0.4, 0.6]],
            "wx": {"joint_counts": [[2, 1], [1, 4]]}}"#,
    );
    let probs = write_temp(
        r#"{"schema_version": 1, "w_labels": ["u", "v"], "x_labels": ["A", "B"],
            "y_support": [0, 1], "y_given_w": [[0.7, 0.3], [0.4, 0.6]],
            "wx": {"joint": [[0.25, 0.125], [0.125, 0.5]]}}"#,
    );
    let run_on = |f: &tempfile::NamedTempFile| {
        let out = run(&[
            "bounds",
            "event",
            "--scenario",
            &f.path().to_string_lossy(),
            "--all-targets",
            "--format",
            "json",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let report: Report = serde_json::from_str(&stdout(&out)).unwrap();
        report
            .results
            .iter()
            .map(|r| (r.interval.lo, r.interval.hi))
            .collect::<Vec<_>>()
    };
    assert_eq!(run_on(&counts), run_on(&probs));
}

#[test]
fn subgroup_scenarios_support_mean_and_quantile() {
    let mean = run(&[
        "bounds",
        "mean",
        "--scenario",
        &fixture("asian-subgroups.json"),
        "--target",
        "Chinese",
    ]);
    assert_eq!(mean.status.code(), Some(0), "{}", stderr(&mean));
    // Binary outcome: the mean bound equals the event bound.
    assert!(
        stdout(&mean).contains("E(y|x=Chinese) \u{2208} [0.0000, 0.3932]"),
        "{}",
        stdout(&mean)
    );
    let quant = run(&[
        "bounds",
        "quantile",
        "--scenario",
        &fixture("asian-subgroups.json"),
        "--alpha",
        "0.5",
        "--target",
        "Chinese",
    ]);
    assert_eq!(quant.status.code(), Some(0), "{}", stderr(&quant));
}

#[test]
fn assume_candidates_wraps_the_joint() {
    let out = run(&[
        "bounds",
        "event",
        "--scenario",
        &fixture("appendix-c.json"),
        "--assume",
        "candidates",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("union of 1 point"), "{text}");
    assert!(text.contains("[0.0909, 0.3896]"), "{text}");
}

#[test]
fn nested_assumption_uses_only_the_target_row() {
    let out = run(&[
        "bounds",
        "event",
        "--scenario",
        &fixture("appendix-c.json"),
        "--assume-nested",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("[0.1273, 0.1455]"), "{text}");
    assert!(text.contains("nested"), "{text}");
}

#[test]
fn quantile_feasible_values_stay_on_support() {
    let out = run(&[
        "bounds",
        "quantile",
        "--scenario",
        &fixture("appendix-c.json"),
        "--alpha",
        "0.9",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: Report = serde_json::from_str(&stdout(&out)).unwrap();
    for r in &report.results {
        for v in r.feasible_values.as_deref().unwrap_or(&[]) {
            assert!(*v == 0.0 || *v == 1.0);
        }
    }
}

#[test]
fn event_bounds_reject_non_binary_outcomes() {
    let f = write_temp(
        r#"{"schema_version": 1, "w_labels": ["u", "v"], "x_labels": ["A", "B"],
            "y_support": [1, 2, 3],
            "y_given_w": [[0.5, 0.3, 0.2], [0.2, 0.3, 0.5]],
            "wx": {"joint": [[0.3, 0.1], [0.1, 0.5]]}}"#,
    );
    let out = run(&["bounds", "event", "--scenario", &f.path().to_string_lossy()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("binary outcome"), "{}", stderr(&out));
}

#[test]
fn oracle_check_rejects_share_scenarios() {
    let out = run(&["oracle", "check", "--scenario", "asian-subgroups"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn marginals_assumption_widens_the_interval() {
    let precise = run(&[
        "bounds",
        "event",
        "--scenario",
        "appendix-c",
        "--format",
        "json",
    ]);
    let downgraded = run(&[
        "bounds",
        "event",
        "--scenario",
        "appendix-c",
        "--assume",
        "marginals-only",
        "--format",
        "json",
    ]);
    let interval = |out: &Output| {
        let report: Report = serde_json::from_str(&stdout(out)).unwrap();
        (report.results[0].interval.lo, report.results[0].interval.hi)
    };
    let (full_lo, full_hi) = interval(&precise);
    let (marg_lo, marg_hi) = interval(&downgraded);
    assert!(marg_lo <= full_lo + 1e-9 && full_hi <= marg_hi + 1e-9);
    assert!(marg_hi - marg_lo > full_hi - full_lo);
}

#[test]
fn scenario_path_precedence_over_fixture_name() {
    // A file literally named like a fixture in the working directory wins.
    let dir = tempfile::tempdir().unwrap();
    let path: PathBuf = dir.path().join("appendix-c");
    std::fs::write(
        &path,
        std::fs::read_to_string(fixture("appendix-c.json"))
            .unwrap()
            .replace("\"Hispanic\"", "\"Local\""),
    )
    .unwrap();
    let out = run(&["bounds", "event", "--scenario", &path.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("x=Local"));
}
