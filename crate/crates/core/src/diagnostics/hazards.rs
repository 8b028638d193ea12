//! Threshold-based hazard flagging over the raw series, plus the combined
//! flooding rule (precipitation anomaly and rolling accumulation).
//!
//! Each warning cites the samples that tripped it; consecutive exceeding
//! hours form one warning rather than one per sample.

use serde::{Deserialize, Serialize};

use crate::ingest::ForecastSeries;

use super::anomaly::{AnomalyParameter, AnomalyReport, AnomalySeverity};
use super::DiagnosticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardKind {
    FloodingRisk,
    HeavyPrecipitation,
    HighWind,
    Heat,
    Cold,
    LowVisibility,
}

impl std::fmt::Display for HazardKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HazardKind::FloodingRisk => "flooding_risk",
            HazardKind::HeavyPrecipitation => "heavy_precipitation",
            HazardKind::HighWind => "high_wind",
            HazardKind::Heat => "heat",
            HazardKind::Cold => "cold",
            HazardKind::LowVisibility => "low_visibility",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardSeverity {
    Advisory,
    Warning,
    Severe,
}

impl std::fmt::Display for HazardSeverity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HazardSeverity::Advisory => "advisory",
            HazardSeverity::Warning => "warning",
            HazardSeverity::Severe => "severe",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggeringValue {
    pub timestamp: i64,
    pub parameter: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardWarning {
    pub kind: HazardKind,
    pub severity: HazardSeverity,
    pub time_range: (i64, i64),
    pub rationale: String,
    pub triggering_values: Vec<TriggeringValue>,
}

/// Per-parameter hazard thresholds. Defaults follow common operational
/// practice; every value is configurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardParams {
    /// Heavy precipitation per-hour rate, mm/h.
    pub heavy_precip_rate: f64,
    /// Flooding: rolling accumulation threshold, mm.
    pub flood_sum: f64,
    /// Flooding: rolling window width, hours.
    pub flood_window_hours: usize,
    /// Sustained wind speed threshold, m/s.
    pub high_wind_sustained: f64,
    /// Gust threshold, m/s.
    pub high_wind_gust: f64,
    /// Heat: degrees above the climatological baseline, °C.
    pub heat_offset: f64,
    /// Cold: degrees below the climatological baseline, °C.
    pub cold_offset: f64,
    /// Low visibility bound, meters.
    pub low_visibility: f64,
}

impl Default for HazardParams {
    fn default() -> Self {
        HazardParams {
            heavy_precip_rate: 7.0,
            flood_sum: 30.0,
            flood_window_hours: 6,
            high_wind_sustained: 17.0,
            high_wind_gust: 25.0,
            heat_offset: 8.0,
            cold_offset: 8.0,
            low_visibility: 1000.0,
        }
    }
}

impl HazardParams {
    fn validate(&self) -> Result<(), DiagnosticsError> {
        let checks = [
            ("heavy_precip_rate", self.heavy_precip_rate),
            ("flood_sum", self.flood_sum),
            ("high_wind_sustained", self.high_wind_sustained),
            ("high_wind_gust", self.high_wind_gust),
            ("heat_offset", self.heat_offset),
            ("cold_offset", self.cold_offset),
            ("low_visibility", self.low_visibility),
        ];
        for (name, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(DiagnosticsError::NonPositiveThreshold(match name {
                    "heavy_precip_rate" => "heavy_precip_rate",
                    "flood_sum" => "flood_sum",
                    "high_wind_sustained" => "high_wind_sustained",
                    "high_wind_gust" => "high_wind_gust",
                    "heat_offset" => "heat_offset",
                    "cold_offset" => "cold_offset",
                    _ => "low_visibility",
                }));
            }
        }
        if self.flood_window_hours < 1 {
            return Err(DiagnosticsError::InvalidWindow(
                "flood_window_hours must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Per-sample rate a precipitation sample must reach to count as a
    /// flooding trigger: the average rate that sustains the rolling sum.
    pub fn flood_trigger_rate(&self) -> f64 {
        self.flood_sum / self.flood_window_hours as f64
    }
}

/// Exceedance-ratio severity bands shared by all per-parameter hazards.
fn severity_from_ratio(ratio: f64) -> HazardSeverity {
    if ratio >= 1.75 {
        HazardSeverity::Severe
    } else if ratio >= 1.25 {
        HazardSeverity::Warning
    } else {
        HazardSeverity::Advisory
    }
}

/// Groups sorted sample indices into maximal consecutive runs.
fn consecutive_runs(indices: &[usize]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut iter = indices.iter().copied();
    let Some(first) = iter.next() else {
        return runs;
    };
    let (mut lo, mut hi) = (first, first);
    for idx in iter {
        if idx == hi + 1 {
            hi = idx;
        } else {
            runs.push((lo, hi));
            lo = idx;
            hi = idx;
        }
    }
    runs.push((lo, hi));
    runs
}

/// Flags hazards from per-parameter thresholds over the raw series, plus
/// flooding risk when a ≥ moderate precipitation anomaly coincides with a
/// rolling accumulation above the configured sum. Warnings are sorted by
/// window start, then kind.
pub fn detect_hazards(
    series: &ForecastSeries,
    anomalies: &[AnomalyReport],
    params: &HazardParams,
) -> Result<Vec<HazardWarning>, DiagnosticsError> {
    params.validate()?;
    let samples = &series.samples;
    let mut warnings = Vec::new();

    // Flooding: anomaly context plus rolling accumulation.
    let precip_anomaly = anomalies
        .iter()
        .find(|a| a.parameter == AnomalyParameter::Precipitation);
    if let Some(anomaly) = precip_anomaly {
        if anomaly.severity >= AnomalySeverity::Moderate
            && samples.len() >= params.flood_window_hours
        {
            let w = params.flood_window_hours;
            let mut in_qualifying = vec![false; samples.len()];
            let mut max_sum = f64::NEG_INFINITY;
            let mut any = false;
            for i in 0..=samples.len() - w {
                let sum: f64 = samples[i..i + w].iter().map(|s| s.precipitation).sum();
                if sum >= params.flood_sum {
                    any = true;
                    max_sum = max_sum.max(sum);
                    for flag in &mut in_qualifying[i..i + w] {
                        *flag = true;
                    }
                }
            }
            if any {
                let rate = params.flood_trigger_rate();
                let triggering: Vec<TriggeringValue> = samples
                    .iter()
                    .enumerate()
                    .filter(|(i, s)| in_qualifying[*i] && s.precipitation >= rate)
                    .map(|(_, s)| TriggeringValue {
                        timestamp: s.timestamp,
                        parameter: "precipitation".into(),
                        value: s.precipitation,
                    })
                    .collect();
                if !triggering.is_empty() {
                    let severity = if anomaly.severity == AnomalySeverity::High {
                        HazardSeverity::Severe
                    } else {
                        HazardSeverity::Warning
                    };
                    warnings.push(HazardWarning {
                        kind: HazardKind::FloodingRisk,
                        severity,
                        time_range: (
                            triggering.first().unwrap().timestamp,
                            triggering.last().unwrap().timestamp,
                        ),
                        rationale: format!(
                            "{w}-hour precipitation reaches {max_sum:.1} mm (threshold {:.1} mm) \
                             alongside a {} precipitation anomaly",
                            params.flood_sum, anomaly.severity
                        ),
                        triggering_values: triggering,
                    });
                }
            }
        }
    }

    // Heavy precipitation: per-hour rate.
    push_run_warnings(
        &mut warnings,
        samples,
        HazardKind::HeavyPrecipitation,
        |s| {
            (s.precipitation >= params.heavy_precip_rate)
                .then_some(("precipitation", s.precipitation))
        },
        |values| {
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (
                severity_from_ratio(max / params.heavy_precip_rate),
                format!(
                    "hourly precipitation up to {max:.1} mm/h (threshold {:.1} mm/h)",
                    params.heavy_precip_rate
                ),
            )
        },
    );

    // High wind: sustained speed or gusts.
    {
        let mut indices = Vec::new();
        for (i, s) in samples.iter().enumerate() {
            let sustained = s.wind_speed >= params.high_wind_sustained;
            let gusting = s
                .wind_gust
                .map(|g| g >= params.high_wind_gust)
                .unwrap_or(false);
            if sustained || gusting {
                indices.push(i);
            }
        }
        for (lo, hi) in consecutive_runs(&indices) {
            let mut triggering = Vec::new();
            let mut max_ratio = 0.0_f64;
            for s in &samples[lo..=hi] {
                if s.wind_speed >= params.high_wind_sustained {
                    triggering.push(TriggeringValue {
                        timestamp: s.timestamp,
                        parameter: "wind_speed".into(),
                        value: s.wind_speed,
                    });
                    max_ratio = max_ratio.max(s.wind_speed / params.high_wind_sustained);
                }
                if let Some(g) = s.wind_gust {
                    if g >= params.high_wind_gust {
                        triggering.push(TriggeringValue {
                            timestamp: s.timestamp,
                            parameter: "wind_gust".into(),
                            value: g,
                        });
                        max_ratio = max_ratio.max(g / params.high_wind_gust);
                    }
                }
            }
            if triggering.is_empty() {
                continue;
            }
            warnings.push(HazardWarning {
                kind: HazardKind::HighWind,
                severity: severity_from_ratio(max_ratio),
                time_range: (samples[lo].timestamp, samples[hi].timestamp),
                rationale: format!(
                    "wind at or above {:.1} m/s sustained or {:.1} m/s in gusts",
                    params.high_wind_sustained, params.high_wind_gust
                ),
                triggering_values: triggering,
            });
        }
    }

    // Heat / cold need a climatological baseline from the temperature anomaly.
    if let Some(anomaly) = anomalies
        .iter()
        .find(|a| a.parameter == AnomalyParameter::Temperature)
    {
        let baseline = anomaly.baseline_mean;
        let heat_bound = baseline + params.heat_offset;
        push_run_warnings(
            &mut warnings,
            samples,
            HazardKind::Heat,
            |s| (s.temperature >= heat_bound).then_some(("temperature", s.temperature)),
            |values| {
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (
                    severity_from_ratio((max - baseline) / params.heat_offset),
                    format!(
                        "temperature up to {max:.1} °C, at least {:.1} °C above the {baseline:.1} °C baseline",
                        params.heat_offset
                    ),
                )
            },
        );
        let cold_bound = baseline - params.cold_offset;
        push_run_warnings(
            &mut warnings,
            samples,
            HazardKind::Cold,
            |s| (s.temperature <= cold_bound).then_some(("temperature", s.temperature)),
            |values| {
                let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
                (
                    severity_from_ratio((baseline - min) / params.cold_offset),
                    format!(
                        "temperature down to {min:.1} °C, at least {:.1} °C below the {baseline:.1} °C baseline",
                        params.cold_offset
                    ),
                )
            },
        );
    }

    // Low visibility.
    push_run_warnings(
        &mut warnings,
        samples,
        HazardKind::LowVisibility,
        |s| (s.visibility < params.low_visibility).then_some(("visibility", s.visibility)),
        |values| {
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let ratio = if min <= 0.0 {
                f64::INFINITY
            } else {
                params.low_visibility / min
            };
            (
                severity_from_ratio(ratio),
                format!(
                    "visibility down to {min:.0} m (bound {:.0} m)",
                    params.low_visibility
                ),
            )
        },
    );

    warnings.sort_by(|a, b| {
        a.time_range
            .0
            .cmp(&b.time_range.0)
            .then_with(|| a.kind.cmp(&b.kind))
    });
    Ok(warnings)
}

/// Emits one warning per consecutive run of samples matched by `pick`,
/// which returns the (parameter, value) pair to cite.
fn push_run_warnings(
    warnings: &mut Vec<HazardWarning>,
    samples: &[crate::ingest::HourlySample],
    kind: HazardKind,
    pick: impl Fn(&crate::ingest::HourlySample) -> Option<(&'static str, f64)>,
    describe: impl Fn(&[f64]) -> (HazardSeverity, String),
) {
    let mut indices = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if pick(s).is_some() {
            indices.push(i);
        }
    }
    for (lo, hi) in consecutive_runs(&indices) {
        let triggering: Vec<TriggeringValue> = samples[lo..=hi]
            .iter()
            .filter_map(|s| {
                pick(s).map(|(parameter, value)| TriggeringValue {
                    timestamp: s.timestamp,
                    parameter: parameter.into(),
                    value,
                })
            })
            .collect();
        let values: Vec<f64> = triggering.iter().map(|t| t.value).collect();
        let (severity, rationale) = describe(&values);
        warnings.push(HazardWarning {
            kind,
            severity,
            time_range: (samples[lo].timestamp, samples[hi].timestamp),
            rationale,
            triggering_values: triggering,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{HourlySample, LocationRef};

    fn base_sample(ts: i64) -> HourlySample {
        HourlySample {
            timestamp: ts,
            temperature: 18.0,
            feels_like: 18.0,
            dew_point: 10.0,
            humidity: 60.0,
            pressure: 1013.0,
            wind_speed: 4.0,
            wind_gust: Some(6.0),
            wind_dir: 200.0,
            precipitation: 0.0,
            cloud_cover: 30.0,
            visibility: 10000.0,
            uv_index: 1.0,
            condition_code: 800,
        }
    }

    fn make_series(edit: impl Fn(usize, &mut HourlySample)) -> ForecastSeries {
        let samples: Vec<_> = (0..48)
            .map(|i| {
                let mut s = base_sample(3600 * i as i64);
                edit(i, &mut s);
                s
            })
            .collect();
        ForecastSeries::new(
            LocationRef {
                name: "t".into(),
                latitude: 0.0,
                longitude: 0.0,
                utc_offset_seconds: 0,
            },
            samples,
        )
        .unwrap()
    }

    fn precip_anomaly(severity: AnomalySeverity) -> AnomalyReport {
        AnomalyReport {
            parameter: AnomalyParameter::Precipitation,
            forecast_aggregate: 90.0,
            baseline_mean: 30.0,
            deviation: 60.0,
            z_score: None,
            percentile: None,
            severity,
        }
    }

    #[test]
    fn flooding_cites_the_rain_block() {
        let series = make_series(|i, s| {
            if (10..16).contains(&i) {
                s.precipitation = 12.0;
            }
        });
        let warnings = detect_hazards(
            &series,
            &[precip_anomaly(AnomalySeverity::High)],
            &HazardParams::default(),
        )
        .unwrap();
        let flood = warnings
            .iter()
            .find(|w| w.kind == HazardKind::FloodingRisk)
            .unwrap();
        assert_eq!(flood.severity, HazardSeverity::Severe);
        assert_eq!(flood.time_range, (10 * 3600, 15 * 3600));
        assert_eq!(flood.triggering_values.len(), 6);
    }

    #[test]
    fn flooding_needs_both_conditions() {
        // Heavy block without an anomaly: no flooding risk.
        let series = make_series(|i, s| {
            if (10..16).contains(&i) {
                s.precipitation = 12.0;
            }
        });
        let warnings = detect_hazards(&series, &[], &HazardParams::default()).unwrap();
        assert!(warnings.iter().all(|w| w.kind != HazardKind::FloodingRisk));

        // Anomaly without a qualifying rolling sum: no flooding risk.
        let calm = make_series(|i, s| {
            if i == 10 {
                s.precipitation = 8.0;
            }
        });
        let warnings = detect_hazards(
            &calm,
            &[precip_anomaly(AnomalySeverity::High)],
            &HazardParams::default(),
        )
        .unwrap();
        assert!(warnings.iter().all(|w| w.kind != HazardKind::FloodingRisk));
    }

    #[test]
    fn calm_series_yields_nothing() {
        let series = make_series(|_, _| {});
        let warnings = detect_hazards(&series, &[], &HazardParams::default()).unwrap();
        assert!(warnings.is_empty());
    }

    #[test]
    fn low_visibility_cites_exactly_the_foggy_hours() {
        let series = make_series(|i, s| {
            if (20..23).contains(&i) {
                s.visibility = 150.0;
            }
        });
        let warnings = detect_hazards(&series, &[], &HazardParams::default()).unwrap();
        assert_eq!(warnings.len(), 1);
        let w = &warnings[0];
        assert_eq!(w.kind, HazardKind::LowVisibility);
        assert_eq!(w.triggering_values.len(), 3);
        assert_eq!(w.time_range, (20 * 3600, 22 * 3600));
        assert_eq!(w.severity, HazardSeverity::Severe); // 1000/150 ≥ 1.75
    }

    #[test]
    fn separate_runs_become_separate_warnings() {
        let series = make_series(|i, s| {
            if i == 5 || i == 30 {
                s.wind_speed = 19.0;
            }
        });
        let warnings = detect_hazards(&series, &[], &HazardParams::default()).unwrap();
        assert_eq!(warnings.len(), 2);
        assert!(warnings.iter().all(|w| w.kind == HazardKind::HighWind));
        assert!(warnings[0].time_range.0 < warnings[1].time_range.0);
    }

    #[test]
    fn gusts_alone_trigger_high_wind() {
        let series = make_series(|i, s| {
            if i == 12 {
                s.wind_gust = Some(27.0);
            }
        });
        let warnings = detect_hazards(&series, &[], &HazardParams::default()).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].triggering_values[0].parameter, "wind_gust");
    }

    #[test]
    fn heat_and_cold_use_anomaly_baseline() {
        let anomaly = AnomalyReport {
            parameter: AnomalyParameter::Temperature,
            forecast_aggregate: 20.0,
            baseline_mean: 18.0,
            deviation: 2.0,
            z_score: None,
            percentile: None,
            severity: AnomalySeverity::None,
        };
        let series = make_series(|i, s| {
            if i == 10 {
                s.temperature = 27.0; // ≥ 18 + 8 = 26
            }
            if i == 40 {
                s.temperature = 9.0; // ≤ 18 − 8 = 10
            }
        });
        let warnings = detect_hazards(&series, &[anomaly], &HazardParams::default()).unwrap();
        let kinds: Vec<_> = warnings.iter().map(|w| w.kind).collect();
        assert_eq!(kinds, vec![HazardKind::Heat, HazardKind::Cold]);
    }

    #[test]
    fn every_triggering_value_exceeds_its_threshold() {
        let params = HazardParams::default();
        let series = make_series(|i, s| {
            if (10..16).contains(&i) {
                s.precipitation = 9.0;
            }
            if i == 20 {
                s.wind_speed = 18.0;
            }
            if i == 30 {
                s.visibility = 400.0;
            }
        });
        let warnings = detect_hazards(
            &series,
            &[precip_anomaly(AnomalySeverity::Moderate)],
            &params,
        )
        .unwrap();
        for w in &warnings {
            assert!(!w.triggering_values.is_empty());
            for t in &w.triggering_values {
                let ok = match (w.kind, t.parameter.as_str()) {
                    (HazardKind::FloodingRisk, "precipitation") => {
                        t.value >= params.flood_trigger_rate()
                    }
                    (HazardKind::HeavyPrecipitation, "precipitation") => {
                        t.value >= params.heavy_precip_rate
                    }
                    (HazardKind::HighWind, "wind_speed") => t.value >= params.high_wind_sustained,
                    (HazardKind::HighWind, "wind_gust") => t.value >= params.high_wind_gust,
                    (HazardKind::LowVisibility, "visibility") => t.value < params.low_visibility,
                    _ => false,
                };
                assert!(
                    ok,
                    "triggering value {t:?} does not exceed threshold for {:?}",
                    w.kind
                );
            }
        }
    }

    #[test]
    fn warnings_sorted_by_window_start() {
        let series = make_series(|i, s| {
            if i == 40 {
                s.wind_speed = 20.0;
            }
            if i == 2 {
                s.visibility = 500.0;
            }
        });
        let warnings = detect_hazards(&series, &[], &HazardParams::default()).unwrap();
        let starts: Vec<_> = warnings.iter().map(|w| w.time_range.0).collect();
        let mut sorted = starts.clone();
        sorted.sort();
        assert_eq!(starts, sorted);
    }
}
