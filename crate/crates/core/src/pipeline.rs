//! End-to-end orchestration: the wiring behind the CLI subcommands and
//! the Python bindings.
//!
//! The three fetches run concurrently; everything after ingestion is
//! sequential and pure, so offline runs (fixtures + mock provider +
//! injected clock) produce byte-identical output trees.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::agents::{
    run_illustrator, run_meteorologist, run_writer, AgentError, AgentRun, ChatProvider,
    HttpProvider, IllustratorRun, MeteorologistOutput, MockProvider, WriterOutput,
    ILLUSTRATOR_SYSTEM, METEOROLOGIST_SYSTEM, WRITER_SYSTEM,
};
use crate::chart::{render_chart, ChartError, RenderedChart};
use crate::config::{PipelineConfig, ProviderSetting};
use crate::context::{build_external_info, ExternalInfoBlock};
use crate::diagnostics::{
    anomaly_score, detect_fronts, detect_hazards, AnomalyParameter, AnomalyReport,
    DiagnosticsError, FrontEvent, HazardWarning,
};
use crate::ingest::{ClimatologyNormals, ForecastSeries, GeoContext, IngestError};
use crate::report::{
    chart_file_name, compile_report, emit_html, emit_markdown, ReportDocument, ReportMeta,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("{stream}: {error}")]
    Ingest {
        stream: &'static str,
        error: IngestError,
    },
    #[error("diagnostics: {0}")]
    Diagnostics(#[from] DiagnosticsError),
    #[error("{role} agent: {error}")]
    Agent {
        role: &'static str,
        error: AgentError,
    },
    #[error("chart: {0}")]
    Chart(#[from] ChartError),
    #[error("output: {0}")]
    Output(String),
}

impl PipelineError {
    /// Process exit code class: 1 config, 2 ingestion/data, 3 agent,
    /// 4 output.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Ingest { .. } | PipelineError::Diagnostics(_) => 2,
            PipelineError::Agent { .. } => 3,
            PipelineError::Chart(_) | PipelineError::Output(_) => 4,
        }
    }
}

/// The three validated input streams plus the raw bytes they were parsed
/// from (persisted by `fetch` for later fixture use).
pub struct FetchOutcome {
    pub series: ForecastSeries,
    pub normals: ClimatologyNormals,
    pub geo: GeoContext,
    pub raw_forecast: Vec<u8>,
    pub raw_climatology: Vec<u8>,
    pub raw_geo: Vec<u8>,
}

impl FetchOutcome {
    pub fn summary_lines(&self) -> Vec<String> {
        vec![
            format!(
                "forecast: OK ({} hourly samples, {} – {})",
                self.series.samples.len(),
                crate::context::format_utc(self.series.start_timestamp()),
                crate::context::format_utc(self.series.end_timestamp()),
            ),
            format!(
                "climatology: OK (12 monthly normals, {}-year baseline)",
                self.normals.baseline_years()
            ),
            format!(
                "geo: OK ({}, region {}, terrain {})",
                self.geo.place_name, self.geo.region_kind, self.geo.terrain_kind
            ),
        ]
    }
}

/// Fetches and validates the three sources concurrently, then truncates
/// the series to the configured horizon.
pub fn run_fetch(config: &PipelineConfig) -> Result<FetchOutcome, PipelineError> {
    let location = &config.location;
    let forecast_source = config.forecast_source_config();
    let climatology_source = config.climatology_source_config();
    let geo_source = config.geo_source_config();

    // Each stream retrieves its payload bytes exactly once; the raw
    // bytes are kept so `fetch` can persist them for later fixture use.
    let (forecast_result, climatology_result, geo_result) = std::thread::scope(|scope| {
        let forecast = scope.spawn(|| -> Result<_, IngestError> {
            location.validate()?;
            let raw = forecast_source.forecast_payload(location)?;
            let series = crate::ingest::parse_forecast(&raw, forecast_source.units, location)?;
            Ok((raw, series))
        });
        let climatology = scope.spawn(|| -> Result<_, IngestError> {
            location.validate()?;
            let raw = climatology_source.climatology_payload(location)?;
            let normals = crate::ingest::parse_climatology(&raw)?;
            Ok((raw, normals))
        });
        let geo = scope.spawn(|| -> Result<_, IngestError> {
            location.validate()?;
            let raw = geo_source.geo_payload(location)?;
            let geo = crate::ingest::parse_geo_context(&raw, location)?;
            Ok((raw, geo))
        });
        (
            forecast.join().expect("forecast fetch thread"),
            climatology.join().expect("climatology fetch thread"),
            geo.join().expect("geo fetch thread"),
        )
    });

    let (raw_forecast, series) = forecast_result.map_err(|error| PipelineError::Ingest {
        stream: "forecast",
        error,
    })?;
    let (raw_climatology, normals) = climatology_result.map_err(|error| PipelineError::Ingest {
        stream: "climatology",
        error,
    })?;
    let (raw_geo, geo) = geo_result.map_err(|error| PipelineError::Ingest {
        stream: "geo",
        error,
    })?;
    Ok(FetchOutcome {
        series: series.truncate(config.horizon_hours),
        normals,
        geo,
        raw_forecast,
        raw_climatology,
        raw_geo,
    })
}

/// Deterministic diagnostic findings for one series.
pub struct DiagnoseOutcome {
    pub fronts: Vec<FrontEvent>,
    pub anomalies: Vec<AnomalyReport>,
    pub hazards: Vec<HazardWarning>,
}

impl DiagnoseOutcome {
    pub fn is_empty(&self) -> bool {
        self.fronts.is_empty() && self.hazards.is_empty()
    }

    /// Machine-readable findings file content.
    pub fn to_json(&self) -> String {
        let value = serde_json::json!({
            "fronts": self.fronts,
            "anomalies": self.anomalies,
            "hazards": self.hazards,
        });
        serde_json::to_string_pretty(&value).expect("serializable findings") + "\n"
    }

    /// Human-readable findings table. Anomalies count as findings only
    /// when their severity reaches moderate.
    pub fn to_table(&self) -> String {
        let notable_anomaly = self
            .anomalies
            .iter()
            .any(|a| a.severity >= crate::diagnostics::AnomalySeverity::Moderate);
        if self.is_empty() && !notable_anomaly {
            return "no findings\n".to_string();
        }
        let mut lines = Vec::new();
        for front in &self.fronts {
            lines.push(format!(
                "front       {}  onset {}  tendency {:.2} hPa/h  veer {:+.0}°  drop {:.1} °C",
                front.kind,
                crate::context::format_utc(front.onset),
                front.pressure_tendency_min,
                front.wind_veer_total,
                front.temp_drop,
            ));
        }
        for anomaly in &self.anomalies {
            let z = anomaly
                .z_score
                .map(|z| format!("z {z:+.2}"))
                .unwrap_or_else(|| "threshold mode".to_string());
            lines.push(format!(
                "anomaly     {}  deviation {:+.2}  {}  severity {}",
                anomaly.parameter, anomaly.deviation, z, anomaly.severity,
            ));
        }
        for hazard in &self.hazards {
            lines.push(format!(
                "hazard      {}  {}  [{} – {}]",
                hazard.kind,
                hazard.severity,
                crate::context::format_utc(hazard.time_range.0),
                crate::context::format_utc(hazard.time_range.1),
            ));
        }
        if lines.is_empty() {
            lines.push("no findings".to_string());
        }
        lines.join("\n") + "\n"
    }
}

/// Runs the deterministic diagnostics layer. Front detection needs at
/// least 12 samples; shorter series simply report no fronts.
pub fn run_diagnostics(
    config: &PipelineConfig,
    series: &ForecastSeries,
    normals: &ClimatologyNormals,
) -> Result<DiagnoseOutcome, PipelineError> {
    let fronts = if series.samples.len() >= 12 {
        detect_fronts(series, &config.front_params)?
    } else {
        Vec::new()
    };
    let anomalies = vec![
        anomaly_score(series, normals, AnomalyParameter::Temperature)?,
        anomaly_score(series, normals, AnomalyParameter::Precipitation)?,
    ];
    let hazards = detect_hazards(series, &anomalies, &config.hazard_params)?;
    Ok(DiagnoseOutcome {
        fronts,
        anomalies,
        hazards,
    })
}

fn build_provider(config: &PipelineConfig) -> Result<Box<dyn ChatProvider>, PipelineError> {
    match config.provider {
        ProviderSetting::Mock => {
            let mock = match &config.mock_scripts_dir {
                Some(dir) => MockProvider::from_dir(dir).map_err(|error| PipelineError::Agent {
                    role: "provider",
                    error,
                })?,
                None => MockProvider::new(),
            };
            Ok(Box::new(mock))
        }
        ProviderSetting::Live => Ok(Box::new(HttpProvider::new(
            config.provider_base_url.clone(),
            config.model.clone(),
            None,
        ))),
    }
}

/// One assembled prompt, dumped under `prompts/` with `--debug-prompts`.
pub struct PromptDump {
    pub file_name: String,
    pub content: String,
}

/// Everything a full `report` run produces, in memory.
pub struct ReportOutcome {
    pub fetch: FetchOutcome,
    pub diagnostics: DiagnoseOutcome,
    pub external_info: ExternalInfoBlock,
    pub meteorologist: AgentRun<MeteorologistOutput>,
    pub writer: AgentRun<WriterOutput>,
    pub illustrator: IllustratorRun,
    pub document: ReportDocument,
    pub markdown: String,
    pub html: String,
    /// Non-fatal notes: budget overruns, dropped chart specs.
    pub notes: Vec<String>,
    pub prompt_dumps: Vec<PromptDump>,
}

/// The full pipeline with the provider built from the config.
pub fn run_report(config: &PipelineConfig) -> Result<ReportOutcome, PipelineError> {
    let provider = build_provider(config)?;
    run_report_with_provider(config, provider.as_ref())
}

/// The full pipeline: ingest → diagnostics → external info → three agents
/// → charts → compile → emit, against an injected chat provider.
pub fn run_report_with_provider(
    config: &PipelineConfig,
    provider: &dyn ChatProvider,
) -> Result<ReportOutcome, PipelineError> {
    let fetch = run_fetch(config)?;
    let diagnostics = run_diagnostics(config, &fetch.series, &fetch.normals)?;
    let external_info = build_external_info(
        &fetch.series,
        &fetch.normals,
        &fetch.geo,
        &diagnostics.fronts,
        &diagnostics.anomalies,
        &diagnostics.hazards,
    )?;

    let mut notes = Vec::new();
    if external_info.exceeds_budget(config.token_budget) {
        notes.push(format!(
            "external info block estimated at {} tokens exceeds the {}-token budget",
            external_info.token_estimate, config.token_budget
        ));
    }

    let meteorologist = run_meteorologist(&external_info, &config.prompt_config, provider)
        .map_err(|error| PipelineError::Agent {
            role: "meteorologist",
            error,
        })?;
    let writer = run_writer(
        &meteorologist.output,
        &fetch.geo,
        &config.prefs,
        &config.prompt_config,
        provider,
    )
    .map_err(|error| PipelineError::Agent {
        role: "writer",
        error,
    })?;
    let illustrator = run_illustrator(
        &fetch.series,
        &meteorologist.output,
        &config.prompt_config,
        provider,
    )
    .map_err(|error| PipelineError::Agent {
        role: "illustrator",
        error,
    })?;
    for dropped in &illustrator.dropped {
        notes.push(format!("illustrator dropped {dropped}"));
    }
    if illustrator.used_defaults {
        notes.push("illustrator selection empty; default chart set substituted".to_string());
    }

    let mut charts: Vec<RenderedChart> = Vec::with_capacity(illustrator.specs.len());
    for spec in &illustrator.specs {
        charts.push(render_chart(spec, &fetch.series)?);
    }

    let generated_at = config
        .clock_utc
        .unwrap_or_else(|| chrono::Utc::now().timestamp());
    let meta = ReportMeta {
        generated_at,
        location_name: fetch.geo.place_name.clone(),
        horizon_hours: fetch.series.horizon_hours,
        provider_model: provider.model_id(),
    };
    let document = compile_report(
        &writer.output,
        &meteorologist.output,
        charts,
        &diagnostics.hazards,
        &diagnostics.anomalies,
        meta,
    );
    let markdown = emit_markdown(&document);
    let html = emit_html(&document);

    let mut prompt_dumps = Vec::new();
    if config.debug_prompts {
        prompt_dumps.push(PromptDump {
            file_name: "meteorologist_system.txt".into(),
            content: METEOROLOGIST_SYSTEM.to_string(),
        });
        for (i, attempt) in meteorologist.attempts.iter().enumerate() {
            prompt_dumps.push(PromptDump {
                file_name: format!("meteorologist_user_attempt_{}.txt", i + 1),
                content: attempt.user_prompt.clone(),
            });
        }
        prompt_dumps.push(PromptDump {
            file_name: "writer_system.txt".into(),
            content: WRITER_SYSTEM.to_string(),
        });
        for (i, attempt) in writer.attempts.iter().enumerate() {
            prompt_dumps.push(PromptDump {
                file_name: format!("writer_user_attempt_{}.txt", i + 1),
                content: attempt.user_prompt.clone(),
            });
        }
        prompt_dumps.push(PromptDump {
            file_name: "illustrator_system.txt".into(),
            content: ILLUSTRATOR_SYSTEM.to_string(),
        });
        prompt_dumps.push(PromptDump {
            file_name: "illustrator_user.txt".into(),
            content: illustrator.user_prompt.clone(),
        });
    }

    Ok(ReportOutcome {
        fetch,
        diagnostics,
        external_info,
        meteorologist,
        writer,
        illustrator,
        document,
        markdown,
        html,
        notes,
        prompt_dumps,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| {
            PipelineError::Output(format!("cannot create {}: {e}", parent.display()))
        })?;
    }
    std::fs::write(path, bytes)
        .map_err(|e| PipelineError::Output(format!("cannot write {}: {e}", path.display())))
}

/// Persists the report bundle: `report.md`, `report.html`,
/// `charts/*.svg`, optional prompt dumps, and the optional PDF conversion.
/// Returns the written paths in a deterministic order.
pub fn write_report_bundle(
    outcome: &ReportOutcome,
    config: &PipelineConfig,
) -> Result<Vec<PathBuf>, PipelineError> {
    let out_dir = &config.out_dir;
    let mut written = Vec::new();

    let md_path = out_dir.join("report.md");
    write_file(&md_path, outcome.markdown.as_bytes())?;
    written.push(md_path);

    let html_path = out_dir.join("report.html");
    write_file(&html_path, outcome.html.as_bytes())?;
    written.push(html_path.clone());

    for (i, chart) in outcome.document.charts.iter().enumerate() {
        let path = out_dir.join("charts").join(chart_file_name(i, chart));
        write_file(&path, chart.svg_text.as_bytes())?;
        written.push(path);
    }

    for dump in &outcome.prompt_dumps {
        let path = out_dir.join("prompts").join(&dump.file_name);
        write_file(&path, dump.content.as_bytes())?;
        written.push(path);
    }

    if let Some(template) = &config.pdf_command {
        let pdf_path = out_dir.join("report.pdf");
        let command_line = template
            .replace("{input}", &html_path.display().to_string())
            .replace("{output}", &pdf_path.display().to_string());
        let mut parts = command_line.split_whitespace();
        let program = parts.next().ok_or_else(|| {
            PipelineError::Output("pdf_command is empty after substitution".into())
        })?;
        let status = std::process::Command::new(program)
            .args(parts)
            .status()
            .map_err(|e| PipelineError::Output(format!("pdf_command failed to start: {e}")))?;
        if !status.success() {
            return Err(PipelineError::Output(format!(
                "pdf_command exited with {status}"
            )));
        }
        written.push(pdf_path);
    }

    Ok(written)
}

/// Persists raw payloads plus a validation summary (the `fetch`
/// subcommand's output). The raw files reuse the default fixture names so
/// a fetch output directory can serve directly as a fixture directory.
pub fn write_fetch_bundle(
    outcome: &FetchOutcome,
    config: &PipelineConfig,
) -> Result<Vec<PathBuf>, PipelineError> {
    let out_dir = &config.out_dir;
    let mut written = Vec::new();
    for (name, bytes) in [
        ("forecast.json", &outcome.raw_forecast),
        ("climatology.json", &outcome.raw_climatology),
        ("geo.json", &outcome.raw_geo),
    ] {
        if bytes.is_empty() {
            continue;
        }
        let path = out_dir.join(name);
        write_file(&path, bytes)?;
        written.push(path);
    }
    let summary = outcome.summary_lines().join("\n") + "\n";
    let summary_path = out_dir.join("fetch_summary.txt");
    write_file(&summary_path, summary.as_bytes())?;
    written.push(summary_path);
    Ok(written)
}

/// Persists diagnostics findings (the `diagnose` subcommand's output).
pub fn write_diagnose_bundle(
    outcome: &DiagnoseOutcome,
    config: &PipelineConfig,
) -> Result<Vec<PathBuf>, PipelineError> {
    let out_dir = &config.out_dir;
    let findings_path = out_dir.join("findings.json");
    write_file(&findings_path, outcome.to_json().as_bytes())?;
    let table_path = out_dir.join("findings.txt");
    write_file(&table_path, outcome.to_table().as_bytes())?;
    Ok(vec![findings_path, table_path])
}
