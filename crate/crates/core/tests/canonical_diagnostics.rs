//! Expected diagnostic findings for the canonical coastal fixture: one
//! merged cold front, a moderate cold temperature anomaly, a high
//! precipitation anomaly, and flooding plus heavy-precipitation hazards
//! over the rain block.

use std::path::PathBuf;

use wxreport::diagnostics::{
    anomaly_score, detect_fronts, detect_hazards, AnomalyParameter, AnomalySeverity,
    FrontDetectionParams, HazardKind, HazardParams, HazardSeverity,
};
use wxreport::ingest::{load_fixture, parse_climatology, parse_forecast, LocationRef, UnitSystem};
use wxreport::{ClimatologyNormals, ForecastSeries};

const START: i64 = 1_748_736_000;

fn canonical() -> (ForecastSeries, ClimatologyNormals) {
    let wire = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/wire");
    let location = LocationRef {
        name: "Cala Bruma".into(),
        latitude: 43.05,
        longitude: 9.85,
        utc_offset_seconds: 0,
    };
    let series = parse_forecast(
        &load_fixture(wire.join("forecast_canonical.json")).unwrap(),
        UnitSystem::Metric,
        &location,
    )
    .unwrap();
    let normals =
        parse_climatology(&load_fixture(wire.join("climatology_canonical.json")).unwrap()).unwrap();
    (series, normals)
}

#[test]
fn one_merged_cold_front_with_onset_at_tendency_minimum() {
    let (series, _) = canonical();
    let fronts = detect_fronts(&series, &FrontDetectionParams::default()).unwrap();
    assert_eq!(fronts.len(), 1, "{fronts:?}");
    let front = &fronts[0];
    // The steepest hourly fall (−2 hPa/h) first occurs at hour 32.
    assert_eq!(front.onset, START + 32 * 3600);
    assert_eq!(front.pressure_tendency_min, -2.0);
    assert_eq!(front.temp_drop, 6.0);
    assert!(front.wind_veer_total >= 45.0);
    assert_eq!(front.evidence_score, 1.0);
    assert!(front.window_start <= front.onset && front.onset <= front.window_end);
}

#[test]
fn temperature_anomaly_is_moderate_cold() {
    let (series, normals) = canonical();
    let report = anomaly_score(&series, &normals, AnomalyParameter::Temperature).unwrap();
    assert_eq!(report.baseline_mean, 20.0);
    assert!(report.deviation < 0.0);
    let z = report.z_score.unwrap();
    assert!((-2.0..-1.0).contains(&z), "z = {z}");
    assert_eq!(report.severity, AnomalySeverity::Moderate);
    assert!(report.percentile.unwrap() < 20.0);
}

#[test]
fn precipitation_anomaly_is_high_in_threshold_mode() {
    let (series, normals) = canonical();
    let report = anomaly_score(&series, &normals, AnomalyParameter::Precipitation).unwrap();
    assert!((report.forecast_aggregate - 690.0).abs() < 1e-9);
    assert_eq!(report.baseline_mean, 28.0);
    assert_eq!(report.z_score, None);
    assert_eq!(report.severity, AnomalySeverity::High);
}

#[test]
fn hazards_cover_the_rain_block() {
    let (series, normals) = canonical();
    let anomalies = vec![
        anomaly_score(&series, &normals, AnomalyParameter::Temperature).unwrap(),
        anomaly_score(&series, &normals, AnomalyParameter::Precipitation).unwrap(),
    ];
    let hazards = detect_hazards(&series, &anomalies, &HazardParams::default()).unwrap();
    let kinds: Vec<_> = hazards.iter().map(|h| h.kind).collect();
    assert_eq!(
        kinds,
        vec![HazardKind::FloodingRisk, HazardKind::HeavyPrecipitation]
    );

    let flood = &hazards[0];
    assert_eq!(flood.severity, HazardSeverity::Severe);
    assert_eq!(flood.time_range, (START + 34 * 3600, START + 37 * 3600));

    let heavy = &hazards[1];
    assert_eq!(heavy.time_range, (START + 34 * 3600, START + 37 * 3600));
    assert_eq!(heavy.severity, HazardSeverity::Warning); // max 12 mm/h vs 7 → ratio 1.71
    assert_eq!(heavy.triggering_values.len(), 4);
}
