//! The three agent roles over a provider-agnostic chat interface.
//!
//! The pipeline ordering is fixed: the meteorologist's output feeds the
//! writer, and the illustrator never runs before the meteorologist. Every
//! completion is schema-validated before anything downstream sees it; on
//! validation failure the runner retries with a repair prompt quoting the
//! verbatim error, up to a configured bound.

mod prompts;
mod provider;
mod validate;

pub use prompts::{
    audience_directive, illustrator_user_prompt, meteorologist_user_prompt, tone_directive,
    writer_user_prompt, Audience, Tone, UserPrefs, ILLUSTRATOR_SYSTEM, METEOROLOGIST_SYSTEM,
    WRITER_SYSTEM,
};
pub use provider::{
    prompt_hash, AgentError, ChatProvider, ChatRequest, ChatResponse, FinishReason, HttpProvider,
    MockProvider, ResponseFormat, SCRIPT_SEPARATOR,
};
pub use validate::{
    extract_json, validate_agent_output, validate_chart_spec, validate_chart_specs_lenient,
    validate_meteorologist, validate_writer, ChartKind, ChartSpec, Confidence, ConfidenceLabel,
    MeteorologistOutput, OutputSchema, ValidatedOutput, ValidationError, WeatherParamDescription,
    WriterOutput,
};

use crate::context::ExternalInfoBlock;
use crate::ingest::{ForecastSeries, GeoContext, PARAMETER_NAMES};

/// Sampling and retry settings shared by the role runners.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptConfig {
    /// Sampling temperature for meteorologist and writer.
    pub temperature: f64,
    /// Sampling temperature for the illustrator.
    pub illustrator_temperature: f64,
    pub max_output_tokens: u32,
    /// Repair retries after the first attempt (R).
    pub max_repair_retries: u32,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig {
            temperature: 0.2,
            illustrator_temperature: 0.0,
            max_output_tokens: 1400,
            max_repair_retries: 2,
        }
    }
}

/// One request/response round, recorded for the run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AttemptRecord {
    pub user_prompt: String,
    pub response_text: String,
    /// `None` on the attempt that validated.
    pub validation_error: Option<String>,
}

/// A validated agent result plus its deterministic retry trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentRun<T> {
    pub output: T,
    pub retry_count: u32,
    pub attempts: Vec<AttemptRecord>,
    pub system_prompt: String,
}

fn repair_prompt(original_user: &str, error: &ValidationError) -> String {
    format!(
        "{original_user}\n\nYour previous response failed validation: {error}\n\
         Return only a corrected JSON value that satisfies the required schema, with no surrounding text."
    )
}

fn run_validated<T>(
    system_prompt: &str,
    base_user_prompt: &str,
    temperature: f64,
    cfg: &PromptConfig,
    provider: &dyn ChatProvider,
    parse: impl Fn(&str) -> Result<T, ValidationError>,
) -> Result<AgentRun<T>, AgentError> {
    let mut attempts = Vec::new();
    let mut user_prompt = base_user_prompt.to_string();
    for attempt in 0..=cfg.max_repair_retries {
        let request = ChatRequest {
            system_prompt: system_prompt.to_string(),
            user_prompt: user_prompt.clone(),
            temperature,
            max_output_tokens: cfg.max_output_tokens,
            response_format_hint: ResponseFormat::JsonObject,
        };
        let response = provider.complete(&request)?;
        match parse(&response.text) {
            Ok(output) => {
                attempts.push(AttemptRecord {
                    user_prompt,
                    response_text: response.text,
                    validation_error: None,
                });
                return Ok(AgentRun {
                    output,
                    retry_count: attempt,
                    attempts,
                    system_prompt: system_prompt.to_string(),
                });
            }
            Err(error) => {
                attempts.push(AttemptRecord {
                    user_prompt,
                    response_text: response.text,
                    validation_error: Some(error.to_string()),
                });
                if attempt == cfg.max_repair_retries {
                    return Err(AgentError::RetriesExhausted {
                        attempts: attempt + 1,
                        last_error: error,
                    });
                }
                user_prompt = repair_prompt(base_user_prompt, &error);
            }
        }
    }
    unreachable!("loop returns on success or exhaustion")
}

/// Runs the meteorologist role over the EXTERNAL INFO block.
pub fn run_meteorologist(
    block: &ExternalInfoBlock,
    cfg: &PromptConfig,
    provider: &dyn ChatProvider,
) -> Result<AgentRun<MeteorologistOutput>, AgentError> {
    let user = meteorologist_user_prompt(block);
    run_validated(
        METEOROLOGIST_SYSTEM,
        &user,
        cfg.temperature,
        cfg,
        provider,
        validate_meteorologist,
    )
}

/// Runs the writer role over the meteorologist output, geography, and
/// user preferences.
pub fn run_writer(
    met: &MeteorologistOutput,
    geo: &GeoContext,
    prefs: &UserPrefs,
    cfg: &PromptConfig,
    provider: &dyn ChatProvider,
) -> Result<AgentRun<WriterOutput>, AgentError> {
    let user = writer_user_prompt(met, geo, prefs);
    run_validated(
        WRITER_SYSTEM,
        &user,
        cfg.temperature,
        cfg,
        provider,
        |raw| validate_writer(raw, &PARAMETER_NAMES),
    )
}

/// Chart selection result: the validated specs plus a note for every spec
/// the validator dropped, and whether the default set was substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct IllustratorRun {
    pub specs: Vec<ChartSpec>,
    pub dropped: Vec<String>,
    pub used_defaults: bool,
    pub system_prompt: String,
    pub user_prompt: String,
}

/// The substitute chart set when the model's selection validates to
/// nothing: temperature, wind, precipitation.
pub fn default_chart_specs() -> Vec<ChartSpec> {
    vec![
        ChartSpec {
            kind: ChartKind::Line,
            title: "Temperature".into(),
            parameters: vec!["temperature".into()],
            y_axis_label: "Temperature (°C)".into(),
            highlight_ranges: Vec::new(),
        },
        ChartSpec {
            kind: ChartKind::Line,
            title: "Wind speed".into(),
            parameters: vec!["wind_speed".into()],
            y_axis_label: "Wind speed (m/s)".into(),
            highlight_ranges: Vec::new(),
        },
        ChartSpec {
            kind: ChartKind::Line,
            title: "Hourly precipitation".into(),
            parameters: vec!["precipitation".into()],
            y_axis_label: "Precipitation (mm/h)".into(),
            highlight_ranges: Vec::new(),
        },
    ]
}

/// Runs the illustrator role. Validation failures degrade instead of
/// aborting: invalid specs are dropped with a recorded note, and if
/// nothing valid remains the default set is substituted. Only provider
/// errors propagate.
pub fn run_illustrator(
    series: &ForecastSeries,
    met: &MeteorologistOutput,
    cfg: &PromptConfig,
    provider: &dyn ChatProvider,
) -> Result<IllustratorRun, AgentError> {
    let user = illustrator_user_prompt(series, met);
    let request = ChatRequest {
        system_prompt: ILLUSTRATOR_SYSTEM.to_string(),
        user_prompt: user.clone(),
        temperature: cfg.illustrator_temperature,
        max_output_tokens: cfg.max_output_tokens,
        response_format_hint: ResponseFormat::JsonObject,
    };
    let response = provider.complete(&request)?;

    let mut specs = Vec::new();
    let mut dropped = Vec::new();
    match validate_chart_specs_lenient(&response.text, series) {
        Ok(results) => {
            for (i, result) in results.into_iter().enumerate() {
                match result {
                    Ok(spec) => specs.push(spec),
                    Err(error) => dropped.push(format!("spec {i}: {error}")),
                }
            }
        }
        Err(error) => dropped.push(format!("response: {error}")),
    }
    let used_defaults = specs.is_empty();
    if used_defaults {
        specs = default_chart_specs();
    }
    if specs.len() > 4 {
        for spec in specs.drain(4..) {
            dropped.push(format!("spec `{}`: exceeds the 4-chart limit", spec.title));
        }
    }
    Ok(IllustratorRun {
        specs,
        dropped,
        used_defaults,
        system_prompt: ILLUSTRATOR_SYSTEM.to_string(),
        user_prompt: user,
    })
}
