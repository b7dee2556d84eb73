use std::path::{Path, PathBuf};
use std::process::Command;

use asym_cli::config::{ExperimentKind, ExperimentParams};
use asym_cli::report::csv_header;
use asym_cli::{parse_config, parse_config_str, render_csv, run, schema, CliError, ExperimentReport};

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn parse_text(text: &str) -> Result<asym_cli::RunConfig, CliError> {
    parse_config_str(text, Path::new("inline.json"), PathBuf::new())
}

fn without_wall_time(report: &ExperimentReport) -> String {
    let mut r = report.clone();
    r.wall_time_s = 0.0;
    r.to_json().unwrap()
}

#[test]
fn minimal_no_broadcast_config_gets_documented_defaults() {
    let cfg = parse_text(r#"{"schema_version": 1, "experiment": "no_broadcast"}"#).unwrap();
    assert_eq!(cfg.seed, 0);
    match &cfg.params {
        ExperimentParams::NoBroadcast(p) => {
            assert_eq!(p.optimizer.lambda_schedule, vec![0.0, 1.0, 4.0, 16.0, 64.0, 256.0]);
            assert_eq!(p.coherence_tol, 1e-4);
        }
        other => panic!("wrong experiment {other:?}"),
    }
}

#[test]
fn negative_tolerance_is_a_parse_error() {
    let err =
        parse_text(r#"{"schema_version": 1, "experiment": "tradeoff", "params": {"slack_tol": -1e-6}}"#).unwrap_err();
    match err {
        CliError::Parse { field, .. } => assert_eq!(field.as_deref(), Some("params.slack_tol")),
        other => panic!("unexpected {other:?}"),
    }
    let err = parse_text(r#"{"schema_version": 1, "experiment": "ki", "params": {"tol": 0}}"#).unwrap_err();
    assert!(matches!(err, CliError::Parse { .. }));
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    let err =
        parse_text("{\n  \"schema_version\": 1,\n  \"experiment\": \"tradeoff\",\n  \"gamma\": 2\n}").unwrap_err();
    match &err {
        CliError::Parse { field, line, .. } => {
            assert_eq!(field.as_deref(), Some("gamma"));
            assert_eq!(*line, Some(4));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.to_string().contains("gamma"));
    let err = parse_text(r#"{"schema_version": 1, "experiment": "tradeoff", "params": {"gamma": 2}}"#).unwrap_err();
    match &err {
        CliError::Parse { field, .. } => assert_eq!(field.as_deref(), Some("params.gamma")),
        other => panic!("unexpected {other:?}"),
    }
    let err = parse_text(r#"{"schema_version": 1, "experiment": "irrev", "params": {"optimizer": {"gamma": 1}}}"#)
        .unwrap_err();
    assert!(err.to_string().contains("gamma"));
}

#[test]
fn schema_version_is_required_and_checked() {
    assert!(matches!(
        parse_text(r#"{"schema_version": 2, "experiment": "ki"}"#),
        Err(CliError::SchemaVersionMismatch { found: 2, .. })
    ));
    assert!(matches!(
        parse_text(r#"{"experiment": "ki"}"#),
        Err(CliError::Parse { .. })
    ));
}

#[test]
fn referenced_files_must_exist_and_parse() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"schema_version": 1, "experiment": "irrev", "params": {"state": "missing.json"}}"#,
    );
    let err = parse_config(&cfg).unwrap_err();
    assert!(matches!(err, CliError::ReadInput { .. }));
    assert_eq!(err.exit_code(), asym_cli::EXIT_CONFIG);

    write(
        dir.path(),
        "bad_state.json",
        r#"{"rows": 2, "cols": 2, "re": [1, 0, 0, 1], "im": [0, 0, 0, 0]}"#,
    );
    let cfg = write(
        dir.path(),
        "c2.json",
        r#"{"schema_version": 1, "experiment": "irrev", "params": {"state": "bad_state.json"}}"#,
    );
    assert!(matches!(parse_config(&cfg), Err(CliError::Parse { .. })));
}

#[test]
fn input_files_drive_the_irreversibility_run() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "zero.json",
        r#"{"rows": 2, "cols": 1, "re": [1, 0], "im": [0, 0]}"#,
    );
    write(
        dir.path(),
        "qubit.json",
        r#"{"dim": 2, "spectrum": [0, 1], "eigenbasis": "computational"}"#,
    );
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"schema_version": 1, "experiment": "irrev", "seed": 5,
            "params": {"state": "zero.json", "system_to": "qubit.json"}}"#,
    );
    let cfg = parse_config(&cfg).unwrap();
    let report = run(&cfg).unwrap();
    assert!(report.all_pass(), "{:?}", report.assertions);
    let value = report.records[0]["value"].as_f64().unwrap();
    assert!(value <= 1e-6, "irrev(|0>, I/2) = {value}");
}

#[test]
fn nonadditivity_default_run_has_three_passing_assertions() {
    let cfg = parse_text(r#"{"schema_version": 1, "experiment": "nonadditivity"}"#).unwrap();
    let report = run(&cfg).unwrap();
    assert_eq!(report.assertions.len(), 3);
    assert!(report.all_pass(), "{:?}", report.assertions);
    assert_eq!(report.summary["smallest_cloner_violation"], 14);
}

#[test]
fn small_tradeoff_run_respects_the_bound() {
    let cfg = parse_text(
        r#"{"schema_version": 1, "experiment": "tradeoff", "seed": 1,
            "params": {"t_grid": [1.5707963267948966, 3.141592653589793],
                       "optimizer": {"lambda_schedule": [0, 4], "restarts": 2, "max_iter": 300}}}"#,
    )
    .unwrap();
    let report = run(&cfg).unwrap();
    assert_eq!(report.summary["skipped_t"].as_array().unwrap().len(), 1);
    for r in &report.records {
        if r["converged"].as_bool().unwrap() {
            assert!(r["slack"].as_f64().unwrap() >= -1e-6, "{r}");
        }
    }
}

#[test]
fn same_seed_gives_identical_reports_except_wall_time() {
    for text in [
        r#"{"schema_version": 1, "experiment": "cloner", "seed": 11}"#,
        r#"{"schema_version": 1, "experiment": "lemma8", "seed": 11, "params": {"trials": 200, "monotonicity_trials": 50}}"#,
        r#"{"schema_version": 1, "experiment": "complementarity", "seed": 11}"#,
    ] {
        let cfg = parse_text(text).unwrap();
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(without_wall_time(&a), without_wall_time(&b));
        assert_eq!(render_csv(&a).unwrap(), render_csv(&b).unwrap());
    }
    let a = run(&parse_text(r#"{"schema_version": 1, "experiment": "cloner", "seed": 1}"#).unwrap()).unwrap();
    let b = run(&parse_text(r#"{"schema_version": 1, "experiment": "cloner", "seed": 2}"#).unwrap()).unwrap();
    assert_ne!(render_csv(&a).unwrap(), render_csv(&b).unwrap());
}

#[test]
fn report_round_trips_through_json() {
    let cfg = parse_text(r#"{"schema_version": 1, "experiment": "complementarity", "seed": 4}"#).unwrap();
    let report = run(&cfg).unwrap();
    let text = report.to_json().unwrap();
    let back: ExperimentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
    assert!(!report.assertions.is_empty());
}

#[test]
fn csv_headers_are_fixed_and_floats_round_trip() {
    assert_eq!(
        csv_header(ExperimentKind::Tradeoff),
        [
            "t",
            "ft_input",
            "ft_output",
            "irrev",
            "lhs",
            "rhs",
            "slack",
            "converged"
        ]
    );
    let cfg = parse_text(r#"{"schema_version": 1, "experiment": "cloner", "seed": 9}"#).unwrap();
    let mut report = run(&cfg).unwrap();
    let text = render_csv(&report).unwrap();
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header, csv_header(ExperimentKind::Cloner));
    let col = header.iter().position(|h| h == "marginal_error").unwrap();
    let c_col = header.iter().position(|h| h == "c_n").unwrap();
    for (row, rec) in rd.records().zip(&report.records) {
        let row = row.unwrap();
        assert_eq!(
            row[col].parse::<f64>().unwrap(),
            rec["marginal_error"].as_f64().unwrap()
        );
        assert_eq!(row[c_col].parse::<f64>().unwrap(), rec["c_n"].as_f64().unwrap());
    }
    assert!(text.contains("\r\n"));

    report.records.clear();
    let empty = render_csv(&report).unwrap();
    assert_eq!(empty, format!("{}\r\n", csv_header(ExperimentKind::Cloner).join(",")));
}

#[test]
fn schema_lists_every_default_parameter() {
    let s = schema::config_schema();
    let branches = s["allOf"].as_array().unwrap();
    assert_eq!(branches.len(), ExperimentKind::ALL.len());
    for kind in ExperimentKind::ALL {
        let defaults = serde_json::to_value(ExperimentParams::defaults(kind)).unwrap();
        let props = schema::params_schema(kind)["properties"].as_object().unwrap().clone();
        for key in defaults["params"].as_object().unwrap().keys() {
            assert!(props.contains_key(key), "{} lacks {key}", kind.name());
        }
        assert_eq!(
            defaults["params"].as_object().unwrap().len(),
            props.len(),
            "{}",
            kind.name()
        );
    }
}

fn tool() -> Command {
    Command::new(env!("CARGO_BIN_EXE_asymtool"))
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(
        dir.path(),
        "ok.json",
        r#"{"schema_version": 1, "experiment": "nonadditivity"}"#,
    );
    let out = dir.path().join("out");
    let st = tool()
        .args(["run", "--config"])
        .arg(&ok)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    assert!(out.join("nonadditivity_report.json").exists());
    assert!(out.join("nonadditivity_records.csv").exists());

    // A cap of 5 copies never reaches the first violation.
    let weak = write(
        dir.path(),
        "weak.json",
        r#"{"schema_version": 1, "experiment": "nonadditivity", "params": {"max_n": 5}}"#,
    );
    let st = tool()
        .args(["run", "--config"])
        .arg(&weak)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));

    // Fewer orbit samples than the orbit needs is a numerical failure.
    let numeric = write(
        dir.path(),
        "num.json",
        r#"{"schema_version": 1, "experiment": "ki", "params": {"orbit_samples": 100}}"#,
    );
    let st = tool()
        .args(["run", "--config"])
        .arg(&numeric)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(3));

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"schema_version": 1, "experiment": "ki", "gamma": 1}"#,
    );
    let st = tool().args(["validate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(st.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&st.stderr).contains("gamma"));

    let st = tool().arg("schema").output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&st.stdout).unwrap();
    assert_eq!(parsed["properties"]["schema_version"]["const"], 1);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"schema_version": 1, "experiment": "cloner", "seed": 1}"#,
    );
    let out = dir.path().join("o");
    let st = tool()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--seed", "42", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    let report: ExperimentReport =
        serde_json::from_str(&std::fs::read_to_string(out.join("cloner_report.json")).unwrap()).unwrap();
    assert_eq!(report.seed, 42);
    assert_eq!(report.config.seed, 42);
}
