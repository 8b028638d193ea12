//! Subcommand-level integration tests: exit codes, classified error
//! lines, and the files each command writes.

mod common;

use std::process::{Command, Output};

fn wxreport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wxreport"))
        .args(args)
        .current_dir(common::repo_root())
        .env_remove("OPENWEATHER_API_KEY")
        .env_remove("LLM_API_KEY")
        .env_remove("METEO_FIXTURE_DIR")
        .output()
        .expect("binary runs")
}

fn stderr_lines(output: &Output) -> Vec<String> {
    String::from_utf8_lossy(&output.stderr)
        .lines()
        .map(str::to_string)
        .collect()
}

fn config_arg() -> String {
    common::canonical_config_path().display().to_string()
}

#[test]
fn fetch_reports_three_sources_ok() {
    let out_dir = tempfile::tempdir().unwrap();
    let output = wxreport(&[
        "fetch",
        "--config",
        &config_arg(),
        "--out",
        out_dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("forecast: OK (48 hourly samples"));
    assert!(stdout.contains("climatology: OK (12 monthly normals, 20-year baseline)"));
    assert!(stdout.contains("geo: OK (Cala Bruma, region urban, terrain coastal)"));
    assert!(out_dir.path().join("forecast.json").exists());
    assert!(out_dir.path().join("fetch_summary.txt").exists());
    // Raw payloads are the exact recorded bytes.
    let raw = std::fs::read(out_dir.path().join("forecast.json")).unwrap();
    let fixture =
        std::fs::read(common::repo_root().join("fixtures/wire/forecast_canonical.json")).unwrap();
    assert_eq!(raw, fixture);
}

#[test]
fn fetch_with_missing_fixture_names_the_source() {
    let out_dir = tempfile::tempdir().unwrap();
    let output = wxreport(&[
        "fetch",
        "--config",
        &config_arg(),
        "--out",
        out_dir.path().to_str().unwrap(),
        "--horizon",
        "48",
    ]);
    assert!(output.status.success());

    // Same config but with a nonexistent climatology fixture.
    let conf = std::fs::read_to_string(common::canonical_config_path()).unwrap();
    let conf = conf.replace("climatology_canonical.json", "climatology_absent.json");
    let conf_path = out_dir.path().join("broken.conf");
    std::fs::write(&conf_path, conf).unwrap();
    let output = wxreport(&[
        "fetch",
        "--config",
        conf_path.to_str().unwrap(),
        "--out",
        out_dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    let errors = stderr_lines(&output);
    assert_eq!(errors.len(), 1, "{errors:?}");
    assert!(errors[0].starts_with("error[ingestion]: climatology:"));
}

#[test]
fn oversized_horizon_fails_before_any_io() {
    let output = wxreport(&["fetch", "--config", &config_arg(), "--horizon", "200"]);
    assert_eq!(output.status.code(), Some(1));
    let errors = stderr_lines(&output);
    assert_eq!(errors.len(), 1);
    assert!(errors[0].starts_with("error[config]:"));
    assert!(errors[0].contains("horizon_hours"));
}

#[test]
fn diagnose_lists_the_canonical_front() {
    let out_dir = tempfile::tempdir().unwrap();
    let output = wxreport(&[
        "diagnose",
        "--config",
        &config_arg(),
        "--out",
        out_dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("cold_front"));
    assert!(stdout.contains("onset 2025-06-02T08:00Z"));

    let findings: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.path().join("findings.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(findings["fronts"].as_array().unwrap().len(), 1);
    assert_eq!(findings["hazards"].as_array().unwrap().len(), 2);
    assert_eq!(
        findings["fronts"][0]["kind"].as_str().unwrap(),
        "cold_front"
    );
}

#[test]
fn diagnose_calm_fixture_reports_no_findings() {
    let out_dir = tempfile::tempdir().unwrap();
    let conf = std::fs::read_to_string(common::canonical_config_path()).unwrap();
    let conf = conf.replace("forecast_canonical.json", "forecast_calm.json");
    let conf_path = out_dir.path().join("calm.conf");
    std::fs::write(&conf_path, conf).unwrap();
    let output = wxreport(&[
        "diagnose",
        "--config",
        conf_path.to_str().unwrap(),
        "--out",
        out_dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    assert!(String::from_utf8_lossy(&output.stdout).contains("no findings"));
}

#[test]
fn report_writes_the_full_bundle() {
    let out_dir = tempfile::tempdir().unwrap();
    let output = wxreport(&[
        "report",
        "--config",
        &config_arg(),
        "--offline",
        "--out",
        out_dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    assert!(out_dir.path().join("report.md").exists());
    assert!(out_dir.path().join("report.html").exists());
    let charts: Vec<_> = std::fs::read_dir(out_dir.path().join("charts"))
        .unwrap()
        .collect();
    assert!(!charts.is_empty());
}

#[test]
fn failing_mock_scripts_exit_with_agent_error() {
    let out_dir = tempfile::tempdir().unwrap();
    let conf = std::fs::read_to_string(common::canonical_config_path()).unwrap();
    let conf = conf.replace("fixtures/mock_scripts", "fixtures/mock_scripts_failing");
    let conf_path = out_dir.path().join("failing.conf");
    std::fs::write(&conf_path, conf).unwrap();
    let output = wxreport(&[
        "report",
        "--config",
        conf_path.to_str().unwrap(),
        "--out",
        out_dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
    let errors = stderr_lines(&output);
    assert_eq!(errors.len(), 1, "{errors:?}");
    assert!(errors[0].starts_with("error[agent]: meteorologist agent:"));
    assert!(errors[0].contains("missing key `warnings`"));
    assert!(errors[0].contains("3 attempts"));
}

#[test]
fn technical_tone_pref_reaches_the_writer_prompt() {
    let out_dir = tempfile::tempdir().unwrap();
    let output = wxreport(&[
        "report",
        "--config",
        &config_arg(),
        "--out",
        out_dir.path().to_str().unwrap(),
        "--prefs",
        "tone=technical",
        "--debug-prompts",
    ]);
    assert!(output.status.success(), "{output:?}");
    let dumped =
        std::fs::read_to_string(out_dir.path().join("prompts/writer_user_attempt_1.txt")).unwrap();
    assert!(dumped.contains(
        "Use precise technical meteorological terminology; assume a professionally trained audience."
    ));
    let golden =
        std::fs::read_to_string(common::goldens_dir().join("writer_prompt_technical.txt")).unwrap();
    assert_eq!(dumped, golden);
}

#[test]
fn live_mode_without_key_gives_actionable_error() {
    let out_dir = tempfile::tempdir().unwrap();
    let conf = std::fs::read_to_string(common::canonical_config_path()).unwrap();
    // Live forecast source against an unroutable endpoint; without an API
    // key the failure happens before any request is attempted.
    let conf = conf.replace("forecast_source = fixture", "forecast_source = live")
        + "forecast_endpoint = http://127.0.0.1:9/unreachable\n";
    let conf_path = out_dir.path().join("live.conf");
    std::fs::write(&conf_path, conf).unwrap();
    let output = wxreport(&[
        "diagnose",
        "--config",
        conf_path.to_str().unwrap(),
        "--out",
        out_dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    let errors = stderr_lines(&output);
    assert_eq!(errors.len(), 1);
    assert!(errors[0].starts_with("error[ingestion]: forecast:"));
    assert!(errors[0].contains("API key"), "{}", errors[0]);
}

#[test]
fn unknown_pref_key_is_a_config_error() {
    let output = wxreport(&[
        "report",
        "--config",
        &config_arg(),
        "--prefs",
        "style=baroque",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_lines(&output)[0].starts_with("error[config]:"));
}

#[test]
fn pdf_command_template_runs_after_emission() {
    let out_dir = tempfile::tempdir().unwrap();
    let conf = std::fs::read_to_string(common::canonical_config_path()).unwrap();
    let conf = format!("{conf}pdf_command = cp {{input}} {{output}}\n");
    let conf_path = out_dir.path().join("pdf.conf");
    std::fs::write(&conf_path, conf).unwrap();
    let output = wxreport(&[
        "report",
        "--config",
        conf_path.to_str().unwrap(),
        "--out",
        out_dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let pdf = std::fs::read(out_dir.path().join("report.pdf")).unwrap();
    let html = std::fs::read(out_dir.path().join("report.html")).unwrap();
    assert_eq!(pdf, html);
}

#[test]
fn location_flag_is_validated_before_io() {
    let output = wxreport(&["fetch", "--config", &config_arg(), "--location", "95,0"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_lines(&output)[0].contains("latitude"));

    let output = wxreport(&["fetch", "--config", &config_arg(), "--location", "not-coords"]);
    assert_eq!(output.status.code(), Some(1));
}
