//! Serialization of forecast, climatology, geography, and diagnostic
//! findings into the structured EXTERNAL INFO block consumed by the agent
//! prompts.
//!
//! The layout is a stable external interface: fixed section order
//! (LOCATION, FORECAST TABLE, CLIMATOLOGY INFO, DIAGNOSTICS), a
//! fixed-column aligned table with fixed decimal places, and timestamps in
//! both UTC and local time. Golden tests pin the exact bytes.

use chrono::{DateTime, FixedOffset, TimeZone, Utc};

use crate::diagnostics::{
    monthly_blend, AnomalyReport, DiagnosticsError, FrontEvent, HazardWarning,
};
use crate::ingest::{ClimatologyNormals, ForecastSeries, GeoContext};

/// One named section of the block, tagged with its data source.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: &'static str,
    pub source_tag: &'static str,
    pub payload: String,
}

impl Section {
    fn render(&self) -> String {
        format!("== {} ==\n{}\n", self.name, self.payload)
    }
}

/// The prompt-ready context bundle. `rendered_text` is always the exact
/// concatenation of the sections, so the block can be re-rendered
/// byte-identically from its parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalInfoBlock {
    pub rendered_text: String,
    pub sections: Vec<Section>,
    pub token_estimate: usize,
}

impl ExternalInfoBlock {
    /// Re-renders from the section list; equals `rendered_text` by
    /// construction.
    pub fn render_sections(&self) -> String {
        let parts: Vec<String> = self.sections.iter().map(Section::render).collect();
        parts.join("\n")
    }

    pub fn exceeds_budget(&self, budget_tokens: usize) -> bool {
        self.token_estimate > budget_tokens
    }
}

/// Deterministic token estimate: character count / 4, rounded up. A
/// prompt-budget guard, not a provider tokenizer.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

/// Minute-precision UTC timestamp, e.g. `2025-06-01T13:00Z`.
pub fn format_utc(ts: i64) -> String {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .map(|dt| dt.format("%Y-%m-%dT%H:%MZ").to_string())
        .unwrap_or_else(|| format!("epoch:{ts}"))
}

/// Minute-precision local timestamp under the given UTC offset.
pub fn format_local(ts: i64, utc_offset_seconds: i32) -> String {
    let offset = FixedOffset::east_opt(utc_offset_seconds)
        .unwrap_or_else(|| FixedOffset::east_opt(0).expect("zero offset is valid"));
    match offset.timestamp_opt(ts, 0) {
        chrono::LocalResult::Single(dt) => dt.format("%Y-%m-%dT%H:%M").to_string(),
        _ => format!("epoch:{ts}"),
    }
}

/// `+02:00`-style rendering of a UTC offset.
pub fn format_offset(utc_offset_seconds: i32) -> String {
    let sign = if utc_offset_seconds < 0 { '-' } else { '+' };
    let abs = utc_offset_seconds.unsigned_abs();
    format!("{sign}{:02}:{:02}", abs / 3600, (abs % 3600) / 60)
}

const TABLE_COLUMNS: [(&str, usize); 14] = [
    ("utc_time", 17),
    ("local_time", 16),
    ("temp_c", 7),
    ("feels_c", 7),
    ("dewp_c", 7),
    ("rh_pct", 6),
    ("pres_hpa", 8),
    ("wind_ms", 7),
    ("gust_ms", 7),
    ("wdir_deg", 8),
    ("precip_mmh", 10),
    ("cloud_pct", 9),
    ("vis_m", 6),
    ("uv", 4),
];

fn table_header() -> String {
    let cells: Vec<String> = TABLE_COLUMNS
        .iter()
        .map(|(name, width)| format!("{name:>width$}"))
        .collect();
    cells.join("  ")
}

fn table_row(sample: &crate::ingest::HourlySample, utc_offset_seconds: i32) -> String {
    let gust = sample
        .wind_gust
        .map(|g| format!("{g:.1}"))
        .unwrap_or_else(|| "-".to_string());
    let cells = [
        format!("{:>17}", format_utc(sample.timestamp)),
        format!("{:>16}", format_local(sample.timestamp, utc_offset_seconds)),
        format!("{:>7.1}", sample.temperature),
        format!("{:>7.1}", sample.feels_like),
        format!("{:>7.1}", sample.dew_point),
        format!("{:>6.0}", sample.humidity),
        format!("{:>8.0}", sample.pressure),
        format!("{:>7.1}", sample.wind_speed),
        format!("{:>7}", gust),
        format!("{:>8.0}", sample.wind_dir),
        format!("{:>10.1}", sample.precipitation),
        format!("{:>9.0}", sample.cloud_cover),
        format!("{:>6.0}", sample.visibility),
        format!("{:>4.1}", sample.uv_index),
    ];
    cells.join("  ")
}

fn location_section(geo: &GeoContext, series: &ForecastSeries) -> Section {
    let elevation = geo
        .elevation
        .map(|e| format!("{e:.0}"))
        .unwrap_or_else(|| "n/a".to_string());
    let payload = format!(
        "place: {}\ncoordinates: {:.4}, {:.4}\nregion: {}\nterrain: {}\nelevation_m: {}\nutc_offset: {}",
        geo.place_name,
        geo.latitude,
        geo.longitude,
        geo.region_kind,
        geo.terrain_kind,
        elevation,
        format_offset(series.location.utc_offset_seconds),
    );
    Section {
        name: "LOCATION",
        source_tag: "geo",
        payload,
    }
}

fn forecast_section(series: &ForecastSeries) -> Section {
    let offset = series.location.utc_offset_seconds;
    let mut lines = Vec::with_capacity(series.samples.len() + 1);
    lines.push(table_header());
    for sample in &series.samples {
        lines.push(table_row(sample, offset));
    }
    Section {
        name: "FORECAST TABLE",
        source_tag: "forecast",
        payload: lines.join("\n"),
    }
}

fn climatology_section(
    series: &ForecastSeries,
    normals: &ClimatologyNormals,
) -> Result<Section, DiagnosticsError> {
    let blend = monthly_blend(series, normals)?;
    let mut lines = vec![
        format!("baseline_years: {}", normals.baseline_years()),
        format!(
            "{:>5}  {:>11}  {:>10}  {:>9}",
            "month", "mean_temp_c", "temp_std_c", "precip_mm"
        ),
    ];
    for span in &blend.spans {
        let normal = normals
            .month(span.month)
            .ok_or(DiagnosticsError::MissingMonth(span.month))?;
        let std = normal
            .temperature_std
            .map(|s| format!("{s:.1}"))
            .unwrap_or_else(|| "n/a".to_string());
        lines.push(format!(
            "{:>5}  {:>11.1}  {:>10}  {:>9.1}",
            format!("{:02}", normal.month),
            normal.mean_temperature,
            std,
            normal.total_precipitation,
        ));
    }
    let std = blend
        .temperature_std
        .map(|s| format!("{s:.2}"))
        .unwrap_or_else(|| "n/a".to_string());
    lines.push(format!("blended_temp_c: {:.2}", blend.temperature));
    lines.push(format!("blended_temp_std_c: {std}"));
    lines.push(format!("blended_precip_mm: {:.2}", blend.precipitation));
    Ok(Section {
        name: "CLIMATOLOGY INFO",
        source_tag: "climatology",
        payload: lines.join("\n"),
    })
}

fn diagnostics_section(
    fronts: &[FrontEvent],
    anomalies: &[AnomalyReport],
    hazards: &[HazardWarning],
) -> Section {
    let mut lines = Vec::new();
    for front in fronts {
        lines.push(format!(
            "front: kind={} onset={} window=[{}, {}] min_tendency_hpa_h={:.2} veer_deg={:+.0} temp_drop_c={:.1} evidence={:.2}",
            front.kind,
            format_utc(front.onset),
            format_utc(front.window_start),
            format_utc(front.window_end),
            front.pressure_tendency_min,
            front.wind_veer_total,
            front.temp_drop,
            front.evidence_score,
        ));
    }
    for anomaly in anomalies {
        let z = anomaly
            .z_score
            .map(|z| format!("{z:+.2}"))
            .unwrap_or_else(|| "n/a".to_string());
        let pct = anomaly
            .percentile
            .map(|p| format!("{p:.1}"))
            .unwrap_or_else(|| "n/a".to_string());
        lines.push(format!(
            "anomaly: parameter={} aggregate={:.2} baseline={:.2} deviation={:+.2} z={z} percentile={pct} severity={}",
            anomaly.parameter,
            anomaly.forecast_aggregate,
            anomaly.baseline_mean,
            anomaly.deviation,
            anomaly.severity,
        ));
    }
    for hazard in hazards {
        lines.push(format!(
            "hazard: kind={} severity={} window=[{}, {}] rationale={}",
            hazard.kind,
            hazard.severity,
            format_utc(hazard.time_range.0),
            format_utc(hazard.time_range.1),
            hazard.rationale,
        ));
    }
    if lines.is_empty() {
        lines.push("none detected".to_string());
    }
    Section {
        name: "DIAGNOSTICS",
        source_tag: "diagnostics",
        payload: lines.join("\n"),
    }
}

/// Serializes all inputs into the EXTERNAL INFO block, with the fixed
/// section order LOCATION → FORECAST TABLE → CLIMATOLOGY INFO →
/// DIAGNOSTICS.
pub fn build_external_info(
    series: &ForecastSeries,
    normals: &ClimatologyNormals,
    geo: &GeoContext,
    fronts: &[FrontEvent],
    anomalies: &[AnomalyReport],
    hazards: &[HazardWarning],
) -> Result<ExternalInfoBlock, DiagnosticsError> {
    let sections = vec![
        location_section(geo, series),
        forecast_section(series),
        climatology_section(series, normals)?,
        diagnostics_section(fronts, anomalies, hazards),
    ];
    let rendered_text = {
        let parts: Vec<String> = sections.iter().map(Section::render).collect();
        parts.join("\n")
    };
    let token_estimate = estimate_tokens(&rendered_text);
    Ok(ExternalInfoBlock {
        rendered_text,
        sections,
        token_estimate,
    })
}

/// Test-support parser that reads forecast values back out of a rendered
/// block. Lives here so round-trip checks stay independent of the table
/// writer's internals: it only assumes whitespace-separated columns.
pub fn parse_forecast_table(rendered: &str) -> Vec<Vec<Option<f64>>> {
    let mut rows = Vec::new();
    let mut in_table = false;
    for line in rendered.lines() {
        if line.starts_with("== FORECAST TABLE ==") {
            in_table = true;
            continue;
        }
        if in_table {
            if line.starts_with("== ") {
                break;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != TABLE_COLUMNS.len() || tokens[0] == "utc_time" {
                continue;
            }
            let values: Vec<Option<f64>> = tokens[2..]
                .iter()
                .map(|t| {
                    if *t == "-" {
                        None
                    } else {
                        t.parse::<f64>().ok()
                    }
                })
                .collect();
            rows.push(values);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{HourlySample, LocationRef, MonthlyNormal, RegionKind, TerrainKind};

    fn series(n: usize) -> ForecastSeries {
        let samples: Vec<_> = (0..n)
            .map(|i| HourlySample {
                timestamp: 1_748_736_000 + 3600 * i as i64,
                temperature: 18.0 + 0.25 * i as f64,
                feels_like: 17.5,
                dew_point: 11.0,
                humidity: 65.0,
                pressure: 1014.0,
                wind_speed: 4.2,
                wind_gust: if i % 2 == 0 { Some(6.8) } else { None },
                wind_dir: 225.0,
                precipitation: 0.0,
                cloud_cover: 40.0,
                visibility: 10000.0,
                uv_index: 1.5,
                condition_code: 801,
            })
            .collect();
        ForecastSeries::new(
            LocationRef {
                name: "Testville".into(),
                latitude: 43.05,
                longitude: 9.85,
                utc_offset_seconds: 7200,
            },
            samples,
        )
        .unwrap()
    }

    fn normals() -> ClimatologyNormals {
        ClimatologyNormals::new(
            (1..=12)
                .map(|m| MonthlyNormal {
                    month: m,
                    mean_temperature: 15.0,
                    temperature_std: Some(1.5),
                    total_precipitation: 40.0,
                    baseline_years: 20,
                })
                .collect(),
        )
        .unwrap()
    }

    fn geo() -> GeoContext {
        GeoContext {
            place_name: "Testville".into(),
            latitude: 43.05,
            longitude: 9.85,
            region_kind: RegionKind::Urban,
            terrain_kind: TerrainKind::Coastal,
            elevation: Some(12.0),
        }
    }

    #[test]
    fn sections_appear_in_fixed_order_with_literal_headers() {
        let s = series(6);
        let block = build_external_info(&s, &normals(), &geo(), &[], &[], &[]).unwrap();
        let text = &block.rendered_text;
        let loc = text.find("== LOCATION ==").unwrap();
        let table = text.find("== FORECAST TABLE ==").unwrap();
        let clim = text.find("== CLIMATOLOGY INFO ==").unwrap();
        let diag = text.find("== DIAGNOSTICS ==").unwrap();
        assert!(loc < table && table < clim && clim < diag);
    }

    #[test]
    fn empty_diagnostics_render_none_detected() {
        let s = series(6);
        let block = build_external_info(&s, &normals(), &geo(), &[], &[], &[]).unwrap();
        assert!(block.rendered_text.contains("none detected"));
    }

    #[test]
    fn rendered_text_is_exact_section_concatenation() {
        let s = series(12);
        let block = build_external_info(&s, &normals(), &geo(), &[], &[], &[]).unwrap();
        assert_eq!(block.rendered_text, block.render_sections());
    }

    #[test]
    fn table_round_trips_at_printed_precision() {
        let s = series(12);
        let block = build_external_info(&s, &normals(), &geo(), &[], &[], &[]).unwrap();
        let rows = parse_forecast_table(&block.rendered_text);
        assert_eq!(rows.len(), 12);
        // Half a printed digit plus representation slack.
        let one_dp = 0.05 + 1e-9;
        let zero_dp = 0.5 + 1e-9;
        for (row, sample) in rows.iter().zip(&s.samples) {
            assert!((row[0].unwrap() - sample.temperature).abs() <= one_dp);
            assert!((row[4].unwrap() - sample.pressure).abs() <= zero_dp);
            match sample.wind_gust {
                Some(g) => assert!((row[6].unwrap() - g).abs() <= one_dp),
                None => assert_eq!(row[6], None),
            }
        }
    }

    #[test]
    fn value_change_above_printed_precision_changes_text() {
        let a = series(8);
        let mut b = a.clone();
        b.samples[3].temperature += 0.1;
        let block_a = build_external_info(&a, &normals(), &geo(), &[], &[], &[]).unwrap();
        let block_b = build_external_info(&b, &normals(), &geo(), &[], &[], &[]).unwrap();
        assert_ne!(block_a.rendered_text, block_b.rendered_text);
    }

    #[test]
    fn token_estimate_is_ceiling_of_quarter_chars() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("12345678"), 2);
        assert_eq!(estimate_tokens("123456789"), 3);
    }

    #[test]
    fn budget_guard_flags_overrun() {
        let s = series(24);
        let block = build_external_info(&s, &normals(), &geo(), &[], &[], &[]).unwrap();
        assert!(block.exceeds_budget(10));
        assert!(!block.exceeds_budget(1_000_000));
    }

    #[test]
    fn utc_and_local_formats() {
        assert_eq!(format_utc(1_748_736_000), "2025-06-01T00:00Z");
        assert_eq!(format_local(1_748_736_000, 7200), "2025-06-01T02:00");
        assert_eq!(format_offset(7200), "+02:00");
        assert_eq!(format_offset(-12600), "-03:30");
    }
}
