//! Compilation of all content blocks into the final report document and
//! its Markdown / HTML emissions.
//!
//! Section order is fixed: synopsis → forecast summary + reasoning →
//! charts → warnings. Warnings merge the agents' free-text alerts with the
//! deterministic hazard findings, de-duplicated by kind, and each line
//! carries its climatological comparison when an anomaly report for the
//! same parameter exists.

use serde::{Deserialize, Serialize};

use crate::agents::{MeteorologistOutput, WeatherParamDescription, WriterOutput};
use crate::chart::RenderedChart;
use crate::context::format_utc;
use crate::diagnostics::{
    AnomalyParameter, AnomalyReport, HazardKind, HazardSeverity, HazardWarning,
};

/// Fixed metadata for the report footer. The generation time is injected
/// by the caller so offline runs are byte-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub generated_at: i64,
    pub location_name: String,
    pub horizon_hours: u32,
    pub provider_model: String,
}

/// One line of the warnings section: either a diagnostic hazard (possibly
/// merged with matching agent text) or an unmatched agent warning.
#[derive(Debug, Clone, PartialEq)]
pub struct WarningEntry {
    pub kind: Option<HazardKind>,
    pub severity: Option<HazardSeverity>,
    pub time_range: Option<(i64, i64)>,
    pub text: String,
    pub agent_notes: Vec<String>,
    pub climatology_note: Option<String>,
}

/// The compiled report document.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub title: String,
    pub synopsis: String,
    pub forecast_summary: String,
    pub reasoning: String,
    pub confidence_label: String,
    pub confidence_score: f64,
    pub weather_params: Vec<WeatherParamDescription>,
    pub charts: Vec<RenderedChart>,
    pub warnings_section: Vec<WarningEntry>,
    pub meta: ReportMeta,
}

/// Keyword classification of an agent warning so it can merge with the
/// matching diagnostic hazard. First match wins; unmatched text stays a
/// standalone entry.
pub fn classify_warning_text(text: &str) -> Option<HazardKind> {
    let lower = text.to_lowercase();
    let rules: [(&[&str], HazardKind); 6] = [
        (&["flood"], HazardKind::FloodingRisk),
        (
            &["rain", "precipitation", "downpour", "shower"],
            HazardKind::HeavyPrecipitation,
        ),
        (&["wind", "gust"], HazardKind::HighWind),
        (&["heat", "hot"], HazardKind::Heat),
        (&["cold", "freez", "frost", "chill"], HazardKind::Cold),
        (&["visibility", "fog", "mist"], HazardKind::LowVisibility),
    ];
    for (needles, kind) in rules {
        if needles.iter().any(|n| lower.contains(n)) {
            return Some(kind);
        }
    }
    None
}

fn anomaly_parameter_for(kind: HazardKind) -> Option<AnomalyParameter> {
    match kind {
        HazardKind::FloodingRisk | HazardKind::HeavyPrecipitation => {
            Some(AnomalyParameter::Precipitation)
        }
        HazardKind::Heat | HazardKind::Cold => Some(AnomalyParameter::Temperature),
        HazardKind::HighWind | HazardKind::LowVisibility => None,
    }
}

fn climatology_note(anomaly: &AnomalyReport) -> String {
    let unit = match anomaly.parameter {
        AnomalyParameter::Temperature => "°C",
        AnomalyParameter::Precipitation => "mm",
    };
    let z = anomaly
        .z_score
        .map(|z| format!(", z-score {z:+.2}"))
        .unwrap_or_default();
    format!(
        "forecast {aggregate:.1} {unit} vs climatological normal {baseline:.1} {unit} \
         (deviation {deviation:+.1} {unit}{z}, {severity} anomaly)",
        aggregate = anomaly.forecast_aggregate,
        baseline = anomaly.baseline_mean,
        deviation = anomaly.deviation,
        severity = anomaly.severity,
    )
}

/// Builds the warnings section: hazards first (sorted as given), each
/// absorbing agent warnings of the same kind; remaining agent warnings
/// follow in their original order.
fn merge_warnings(
    agent_warnings: &[String],
    hazards: &[HazardWarning],
    anomalies: &[AnomalyReport],
) -> Vec<WarningEntry> {
    let note_for = |kind: HazardKind| {
        anomaly_parameter_for(kind)
            .and_then(|p| anomalies.iter().find(|a| a.parameter == p))
            .map(climatology_note)
    };

    let mut entries: Vec<WarningEntry> = hazards
        .iter()
        .map(|h| WarningEntry {
            kind: Some(h.kind),
            severity: Some(h.severity),
            time_range: Some(h.time_range),
            text: h.rationale.clone(),
            agent_notes: Vec::new(),
            climatology_note: note_for(h.kind),
        })
        .collect();

    for warning in agent_warnings {
        let classified = classify_warning_text(warning);
        let merged = classified.and_then(|kind| {
            entries
                .iter_mut()
                .find(|e| e.kind == Some(kind))
                .map(|entry| entry.agent_notes.push(warning.clone()))
        });
        if merged.is_none() {
            entries.push(WarningEntry {
                kind: classified,
                severity: None,
                time_range: None,
                text: warning.clone(),
                agent_notes: Vec::new(),
                climatology_note: classified.and_then(&note_for),
            });
        }
    }
    entries
}

/// Assembles the document in the fixed section order. Pure given fixed
/// metadata.
pub fn compile_report(
    writer: &WriterOutput,
    met: &MeteorologistOutput,
    charts: Vec<RenderedChart>,
    hazards: &[HazardWarning],
    anomalies: &[AnomalyReport],
    meta: ReportMeta,
) -> ReportDocument {
    ReportDocument {
        title: writer.title.clone(),
        synopsis: writer.introduction.clone(),
        forecast_summary: met.summary.clone(),
        reasoning: met.explanation.clone(),
        confidence_label: met.confidence.label.to_string(),
        confidence_score: met.confidence.score,
        weather_params: writer.weather_params.clone(),
        charts,
        warnings_section: merge_warnings(&met.warnings, hazards, anomalies),
        meta,
    }
}

/// Deterministic relative file name for the i-th chart of a document.
pub fn chart_file_name(index: usize, chart: &RenderedChart) -> String {
    let slug: String = chart
        .spec
        .parameters
        .join("-")
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("chart_{:02}_{slug}.svg", index + 1)
}

fn ensure_period(text: &str) -> String {
    if text.ends_with(['.', '!', '?']) {
        text.to_string()
    } else {
        format!("{text}.")
    }
}

fn warning_line(entry: &WarningEntry) -> String {
    let mut line = String::new();
    match (entry.kind, entry.severity, entry.time_range) {
        (Some(kind), Some(severity), Some((start, end))) => {
            line.push_str(&format!(
                "**{kind}** ({severity}, {} – {}): {}",
                format_utc(start),
                format_utc(end),
                ensure_period(&entry.text)
            ));
        }
        (Some(kind), _, _) => line.push_str(&format!("**{kind}**: {}", ensure_period(&entry.text))),
        _ => line.push_str(&ensure_period(&entry.text)),
    }
    for note in &entry.agent_notes {
        line.push_str(&format!(" Agent note: {}", ensure_period(note)));
    }
    if let Some(note) = &entry.climatology_note {
        line.push_str(&format!(" Climatology: {note}."));
    }
    line
}

/// Emits the document as Markdown; charts are referenced by relative path
/// under `charts/`.
pub fn emit_markdown(doc: &ReportDocument) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {}\n\n", doc.title));
    out.push_str(&format!(
        "_{} · {} · next {} h · model {}_\n\n",
        format_utc(doc.meta.generated_at),
        doc.meta.location_name,
        doc.meta.horizon_hours,
        doc.meta.provider_model,
    ));
    out.push_str("## Synopsis\n\n");
    out.push_str(&format!("{}\n\n", doc.synopsis));
    out.push_str("## Forecast Summary\n\n");
    out.push_str(&format!("{}\n\n", doc.forecast_summary));
    out.push_str("### Reasoning\n\n");
    out.push_str(&format!("{}\n\n", doc.reasoning));
    out.push_str(&format!(
        "Confidence: {} ({:.2})\n\n",
        doc.confidence_label, doc.confidence_score
    ));
    if !doc.weather_params.is_empty() {
        out.push_str("### Key Parameters\n\n");
        for param in &doc.weather_params {
            out.push_str(&format!("- **{}**: {}\n", param.name, param.description));
        }
        out.push('\n');
    }
    if !doc.charts.is_empty() {
        out.push_str("## Charts\n\n");
        for (i, chart) in doc.charts.iter().enumerate() {
            out.push_str(&format!(
                "![{}](charts/{})\n\n",
                chart.spec.title,
                chart_file_name(i, chart)
            ));
        }
    }
    if !doc.warnings_section.is_empty() {
        out.push_str("## Warnings\n\n");
        for entry in &doc.warnings_section {
            out.push_str(&format!("- {}\n", warning_line(entry)));
        }
        out.push('\n');
    }
    out
}

fn escape_html(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Emits the document as a single self-contained HTML page with inline
/// styles and inline SVG charts.
pub fn emit_html(doc: &ReportDocument) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\"/>\n");
    out.push_str(&format!("<title>{}</title>\n", escape_html(&doc.title)));
    out.push_str(
        "<style>\nbody { font-family: Georgia, serif; max-width: 860px; margin: 2rem auto; \
         padding: 0 1rem; color: #1a1a2e; }\nh1 { border-bottom: 2px solid #1f77b4; \
         padding-bottom: 0.3rem; }\nh2 { color: #1f477b; margin-top: 2rem; }\n.meta { color: #666; \
         font-size: 0.9rem; }\n.confidence { background: #eef3f8; padding: 0.4rem 0.8rem; \
         border-radius: 4px; display: inline-block; }\n.warning { background: #fdf3e3; \
         border-left: 4px solid #e0a030; padding: 0.5rem 0.8rem; margin: 0.5rem 0; }\nfigure \
         { margin: 1.5rem 0; }\ndl dt { font-weight: bold; }\ndl dd { margin: 0 0 0.6rem 1rem; }\n</style>\n",
    );
    out.push_str("</head>\n<body>\n");
    out.push_str(&format!("<h1>{}</h1>\n", escape_html(&doc.title)));
    out.push_str(&format!(
        "<p class=\"meta\">{} · {} · next {} h · model {}</p>\n",
        format_utc(doc.meta.generated_at),
        escape_html(&doc.meta.location_name),
        doc.meta.horizon_hours,
        escape_html(&doc.meta.provider_model),
    ));
    out.push_str("<h2>Synopsis</h2>\n");
    out.push_str(&format!("<p>{}</p>\n", escape_html(&doc.synopsis)));
    out.push_str("<h2>Forecast Summary</h2>\n");
    out.push_str(&format!("<p>{}</p>\n", escape_html(&doc.forecast_summary)));
    out.push_str("<h3>Reasoning</h3>\n");
    out.push_str(&format!("<p>{}</p>\n", escape_html(&doc.reasoning)));
    out.push_str(&format!(
        "<p class=\"confidence\">Confidence: {} ({:.2})</p>\n",
        escape_html(&doc.confidence_label),
        doc.confidence_score,
    ));
    if !doc.weather_params.is_empty() {
        out.push_str("<h3>Key Parameters</h3>\n<dl>\n");
        for param in &doc.weather_params {
            out.push_str(&format!(
                "<dt>{}</dt>\n<dd>{}</dd>\n",
                escape_html(&param.name),
                escape_html(&param.description)
            ));
        }
        out.push_str("</dl>\n");
    }
    if !doc.charts.is_empty() {
        out.push_str("<h2>Charts</h2>\n");
        for chart in &doc.charts {
            out.push_str("<figure>\n");
            out.push_str(&chart.svg_text);
            out.push_str("</figure>\n");
        }
    }
    if !doc.warnings_section.is_empty() {
        out.push_str("<h2>Warnings</h2>\n");
        for entry in &doc.warnings_section {
            let line = warning_line(entry).replace("**", "");
            out.push_str(&format!(
                "<div class=\"warning\">{}</div>\n",
                escape_html(&line)
            ));
        }
    }
    out.push_str("</body>\n</html>\n");
    out
}
