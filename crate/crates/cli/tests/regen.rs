//! Regenerates the checked-in mock scripts and golden files from the
//! canonical fixtures. Gated behind UPDATE_GOLDENS=1 so normal test runs
//! never rewrite anything:
//!
//! ```text
//! UPDATE_GOLDENS=1 cargo test -p wxreport-cli --test regen
//! ```

mod common;

use common::{RecordingProvider, RoleMock};

use wxreport::agents::{
    default_chart_specs, validate_meteorologist, writer_user_prompt, Audience, Tone, UserPrefs,
};
use wxreport::chart::render_chart;
use wxreport::pipeline::{run_fetch, run_report_with_provider, PipelineError};
use wxreport::report::chart_file_name;

#[test]
fn regenerate_mock_scripts_and_goldens() {
    if std::env::var("UPDATE_GOLDENS").as_deref() != Ok("1") {
        return;
    }
    let root = common::repo_root();
    let config = common::canonical_config();

    // Canonical happy-path scripts plus the report-tree goldens. A second
    // pass with the technical tone records the alternate writer prompt so
    // `--prefs tone=technical` also has a script.
    let role_mock = RoleMock::canonical();
    let recorder = RecordingProvider::new(&role_mock);
    let outcome = run_report_with_provider(&config, &recorder).expect("canonical run succeeds");
    let mut technical = config.clone();
    technical.prefs.tone = Tone::Technical;
    run_report_with_provider(&technical, &recorder).expect("technical-tone run succeeds");
    recorder
        .dump_scripts(&root.join("fixtures/mock_scripts"))
        .unwrap();

    let goldens = common::goldens_dir();
    std::fs::create_dir_all(goldens.join("report/charts")).unwrap();
    std::fs::write(
        goldens.join("external_info.txt"),
        &outcome.external_info.rendered_text,
    )
    .unwrap();
    std::fs::write(goldens.join("report/report.md"), &outcome.markdown).unwrap();
    std::fs::write(goldens.join("report/report.html"), &outcome.html).unwrap();
    for (i, chart) in outcome.document.charts.iter().enumerate() {
        std::fs::write(
            goldens
                .join("report/charts")
                .join(chart_file_name(i, chart)),
            &chart.svg_text,
        )
        .unwrap();
    }

    // Default temperature chart over the canonical series.
    let fetch = run_fetch(&config).unwrap();
    let temp_chart = render_chart(&default_chart_specs()[0], &fetch.series).unwrap();
    std::fs::write(goldens.join("chart_temperature.svg"), &temp_chart.svg_text).unwrap();

    // Writer prompt with the technical tone directive.
    let met = validate_meteorologist(common::MET_RESPONSE).unwrap();
    let prefs = UserPrefs {
        tone: Tone::Technical,
        audience: Audience::General,
    };
    let prompt = writer_user_prompt(&met, &fetch.geo, &prefs);
    std::fs::write(goldens.join("writer_prompt_technical.txt"), prompt).unwrap();

    // Failing retry sequence: the meteorologist keeps omitting `warnings`.
    let failing = RoleMock::failing_meteorologist();
    let recorder = RecordingProvider::new(&failing);
    match run_report_with_provider(&config, &recorder) {
        Err(PipelineError::Agent {
            role: "meteorologist",
            ..
        }) => {}
        Err(other) => panic!("expected meteorologist retry exhaustion, got {other}"),
        Ok(_) => panic!("expected meteorologist retry exhaustion, got success"),
    }
    recorder
        .dump_scripts(&root.join("fixtures/mock_scripts_failing"))
        .unwrap();
}
