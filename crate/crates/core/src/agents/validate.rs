//! Strict schema validation of raw agent output.
//!
//! No raw provider text crosses the module boundary unvalidated: the
//! runners hand every completion through here and downstream consumers
//! only ever see the typed outputs. Errors name the first violated rule
//! so repair prompts can quote it.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::ingest::{ForecastSeries, PARAMETER_NAMES};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ValidationError {
    #[error("unparseable output: {0}")]
    Unparseable(String),
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("empty value for `{0}`")]
    EmptyField(&'static str),
    #[error("type mismatch for `{key}`: expected {expected}")]
    TypeMismatch {
        key: &'static str,
        expected: &'static str,
    },
    #[error("bound violation for `{key}`: {message}")]
    BoundViolation { key: &'static str, message: String },
    #[error("cross-field violation: {0}")]
    CrossField(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceLabel {
    Low,
    Medium,
    High,
}

impl ConfidenceLabel {
    /// Band boundaries: low < 0.4 <= medium < 0.7 <= high.
    pub fn for_score(score: f64) -> ConfidenceLabel {
        if score >= 0.7 {
            ConfidenceLabel::High
        } else if score >= 0.4 {
            ConfidenceLabel::Medium
        } else {
            ConfidenceLabel::Low
        }
    }
}

impl std::fmt::Display for ConfidenceLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConfidenceLabel::Low => "low",
            ConfidenceLabel::Medium => "medium",
            ConfidenceLabel::High => "high",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    pub label: ConfidenceLabel,
    pub score: f64,
}

/// The meteorologist's four-field structured interpretation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeteorologistOutput {
    pub summary: String,
    pub explanation: String,
    pub confidence: Confidence,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherParamDescription {
    pub name: String,
    pub description: String,
}

/// The writer's textual structure for the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WriterOutput {
    pub title: String,
    pub introduction: String,
    pub weather_params: Vec<WeatherParamDescription>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Line,
}

/// A declarative chart request: which parameters to plot and how to label
/// them. Rendering is done by the trusted renderer in `chart`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub title: String,
    pub parameters: Vec<String>,
    pub y_axis_label: String,
    #[serde(default)]
    pub highlight_ranges: Vec<(i64, i64)>,
}

/// Extracts the first balanced JSON object or array from text that may
/// surround it with prose or code fences.
pub fn extract_json(raw: &str) -> Result<Value, ValidationError> {
    let bytes = raw.as_bytes();
    let mut start = 0;
    while let Some(offset) = raw[start..].find(['{', '[']) {
        let open = start + offset;
        if let Some(end) = balanced_end(bytes, open) {
            if let Ok(value) = serde_json::from_str::<Value>(&raw[open..=end]) {
                return Ok(value);
            }
        }
        start = open + 1;
    }
    let preview: String = raw.chars().take(80).collect();
    Err(ValidationError::Unparseable(format!(
        "no JSON object or array found in: {preview}"
    )))
}

fn balanced_end(bytes: &[u8], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(open) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' | b'[' => depth += 1,
            b'}' | b']' => {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn require<'v>(value: &'v Value, key: &'static str) -> Result<&'v Value, ValidationError> {
    value
        .as_object()
        .ok_or(ValidationError::TypeMismatch {
            key: "root",
            expected: "object",
        })?
        .get(key)
        .ok_or(ValidationError::MissingKey(key))
}

fn require_string(value: &Value, key: &'static str) -> Result<String, ValidationError> {
    let raw = require(value, key)?
        .as_str()
        .ok_or(ValidationError::TypeMismatch {
            key,
            expected: "string",
        })?;
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(ValidationError::EmptyField(key));
    }
    Ok(trimmed.to_string())
}

fn require_number(value: &Value, key: &'static str) -> Result<f64, ValidationError> {
    require(value, key)?
        .as_f64()
        .ok_or(ValidationError::TypeMismatch {
            key,
            expected: "number",
        })
}

/// Validates the meteorologist's four-field object, including the
/// label/score consistency rule.
pub fn validate_meteorologist(raw: &str) -> Result<MeteorologistOutput, ValidationError> {
    let value = extract_json(raw)?;
    let summary = require_string(&value, "summary")?;
    let explanation = require_string(&value, "explanation")?;
    let label_raw = require_string(&value, "confidence_label")?;
    let label = match label_raw.as_str() {
        "low" => ConfidenceLabel::Low,
        "medium" => ConfidenceLabel::Medium,
        "high" => ConfidenceLabel::High,
        other => {
            return Err(ValidationError::BoundViolation {
                key: "confidence_label",
                message: format!("`{other}` is not one of low, medium, high"),
            })
        }
    };
    let score = require_number(&value, "confidence_score")?;
    if !(0.0..=1.0).contains(&score) {
        return Err(ValidationError::BoundViolation {
            key: "confidence_score",
            message: format!("{score} outside [0, 1]"),
        });
    }
    let expected = ConfidenceLabel::for_score(score);
    if expected != label {
        return Err(ValidationError::CrossField(format!(
            "confidence label `{label}` inconsistent with score {score} (bands give `{expected}`)"
        )));
    }
    let warnings_value = require(&value, "warnings")?;
    let warnings_array = warnings_value
        .as_array()
        .ok_or(ValidationError::TypeMismatch {
            key: "warnings",
            expected: "array of strings",
        })?;
    let mut warnings = Vec::with_capacity(warnings_array.len());
    for item in warnings_array {
        let text = item.as_str().ok_or(ValidationError::TypeMismatch {
            key: "warnings",
            expected: "array of strings",
        })?;
        warnings.push(text.to_string());
    }
    Ok(MeteorologistOutput {
        summary,
        explanation,
        confidence: Confidence { label, score },
        warnings,
    })
}

/// Validates the writer object; parameter names must come from the
/// forecast parameter set.
pub fn validate_writer(
    raw: &str,
    allowed_parameters: &[&str],
) -> Result<WriterOutput, ValidationError> {
    let value = extract_json(raw)?;
    let title = require_string(&value, "title")?;
    let introduction = require_string(&value, "introduction")?;
    let params_value = require(&value, "weather_params")?;
    let params_array = params_value
        .as_array()
        .ok_or(ValidationError::TypeMismatch {
            key: "weather_params",
            expected: "array of {name, description} objects",
        })?;
    let mut weather_params = Vec::with_capacity(params_array.len());
    for item in params_array {
        let name = require_string(item, "name")?;
        let description = require_string(item, "description")?;
        if !allowed_parameters.contains(&name.as_str()) {
            return Err(ValidationError::UnknownParameter(name));
        }
        weather_params.push(WeatherParamDescription { name, description });
    }
    Ok(WriterOutput {
        title,
        introduction,
        weather_params,
    })
}

/// Validates one chart-spec object against the series it will be rendered
/// over.
pub fn validate_chart_spec(
    value: &Value,
    series: &ForecastSeries,
) -> Result<ChartSpec, ValidationError> {
    let kind = require_string(value, "kind")?;
    if kind != "line" {
        return Err(ValidationError::BoundViolation {
            key: "kind",
            message: format!("`{kind}` is not a supported chart kind (only `line`)"),
        });
    }
    let title = require_string(value, "title")?;
    let y_axis_label = require_string(value, "y_axis_label")?;
    let params_value = require(value, "parameters")?;
    let params_array = params_value
        .as_array()
        .ok_or(ValidationError::TypeMismatch {
            key: "parameters",
            expected: "array of parameter names",
        })?;
    if params_array.is_empty() || params_array.len() > 3 {
        return Err(ValidationError::BoundViolation {
            key: "parameters",
            message: format!("{} parameters given, expected 1 to 3", params_array.len()),
        });
    }
    let mut parameters = Vec::with_capacity(params_array.len());
    for item in params_array {
        let name = item.as_str().ok_or(ValidationError::TypeMismatch {
            key: "parameters",
            expected: "array of parameter names",
        })?;
        if !PARAMETER_NAMES.contains(&name) {
            return Err(ValidationError::UnknownParameter(name.to_string()));
        }
        if series.samples.iter().any(|s| s.parameter(name).is_none()) {
            return Err(ValidationError::BoundViolation {
                key: "parameters",
                message: format!("parameter `{name}` is not available for every sample"),
            });
        }
        parameters.push(name.to_string());
    }
    let mut highlight_ranges = Vec::new();
    if let Some(ranges_value) = value.get("highlight_ranges") {
        if !ranges_value.is_null() {
            let ranges = ranges_value
                .as_array()
                .ok_or(ValidationError::TypeMismatch {
                    key: "highlight_ranges",
                    expected: "array of [start, end] pairs",
                })?;
            for pair in ranges {
                let pair_array = pair.as_array().ok_or(ValidationError::TypeMismatch {
                    key: "highlight_ranges",
                    expected: "array of [start, end] pairs",
                })?;
                let (Some(start), Some(end)) = (
                    pair_array.first().and_then(Value::as_i64),
                    pair_array.get(1).and_then(Value::as_i64),
                ) else {
                    return Err(ValidationError::TypeMismatch {
                        key: "highlight_ranges",
                        expected: "array of [start, end] integer pairs",
                    });
                };
                if start > end || start < series.start_timestamp() || end > series.end_timestamp() {
                    return Err(ValidationError::BoundViolation {
                        key: "highlight_ranges",
                        message: format!("[{start}, {end}] outside the series time range"),
                    });
                }
                highlight_ranges.push((start, end));
            }
        }
    }
    Ok(ChartSpec {
        kind: ChartKind::Line,
        title,
        parameters,
        y_axis_label,
        highlight_ranges,
    })
}

/// Per-element validation of a chart-spec array: invalid elements become
/// `Err` entries the caller may drop without aborting.
pub fn validate_chart_specs_lenient(
    raw: &str,
    series: &ForecastSeries,
) -> Result<Vec<Result<ChartSpec, ValidationError>>, ValidationError> {
    let value = extract_json(raw)?;
    let array = value.as_array().ok_or(ValidationError::TypeMismatch {
        key: "root",
        expected: "array of chart specs",
    })?;
    Ok(array
        .iter()
        .map(|item| validate_chart_spec(item, series))
        .collect())
}

/// Schema selector for the generic validation entry point.
pub enum OutputSchema<'a> {
    Meteorologist,
    Writer { allowed_parameters: &'a [&'a str] },
    ChartSpecs { series: &'a ForecastSeries },
}

pub enum ValidatedOutput {
    Meteorologist(MeteorologistOutput),
    Writer(WriterOutput),
    ChartSpecs(Vec<ChartSpec>),
}

/// Strict validation entry point: parses the first JSON value out of the
/// raw text and checks it against the selected schema, failing on the
/// first violated rule.
pub fn validate_agent_output(
    raw: &str,
    schema: &OutputSchema<'_>,
) -> Result<ValidatedOutput, ValidationError> {
    match schema {
        OutputSchema::Meteorologist => {
            validate_meteorologist(raw).map(ValidatedOutput::Meteorologist)
        }
        OutputSchema::Writer { allowed_parameters } => {
            validate_writer(raw, allowed_parameters).map(ValidatedOutput::Writer)
        }
        OutputSchema::ChartSpecs { series } => {
            let results = validate_chart_specs_lenient(raw, series)?;
            let mut specs = Vec::with_capacity(results.len());
            for result in results {
                specs.push(result?);
            }
            Ok(ValidatedOutput::ChartSpecs(specs))
        }
    }
}
