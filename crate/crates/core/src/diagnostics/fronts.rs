//! Pressure tendencies and cold-front detection.
//!
//! A cold front is flagged when, inside a sliding window, three signals
//! fire jointly: a sustained pressure fall, a large accumulated wind
//! rotation, and a rapid temperature drop. Overlapping firing windows are
//! merged into one event so a single synoptic feature is reported once.

use serde::{Deserialize, Serialize};

use crate::ingest::ForecastSeries;

use super::circular::accumulate_rotation;
use super::DiagnosticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontKind {
    ColdFront,
}

impl std::fmt::Display for FrontKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FrontKind::ColdFront => "cold_front",
        })
    }
}

/// One detected frontal passage. All recorded signal values satisfy the
/// firing thresholds they were detected with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontEvent {
    pub kind: FrontKind,
    /// Timestamp of the pressure-tendency minimum (earliest on ties).
    pub onset: i64,
    pub window_start: i64,
    pub window_end: i64,
    pub pressure_tendency_min: f64,
    pub wind_veer_total: f64,
    pub temp_drop: f64,
    pub evidence_score: f64,
}

/// Firing thresholds for front detection. Defaults follow common
/// operational practice; every value is configurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontDetectionParams {
    /// Sliding window width W in hours; a window covers W+1 hourly samples.
    pub window_hours: usize,
    /// Minimum pressure fall rate, hPa/h (positive magnitude).
    pub pressure_tendency_threshold: f64,
    /// Minimum accumulated |rotation| across the window, degrees.
    pub veer_threshold_deg: f64,
    /// Minimum temperature drop, °C, within any sub-interval of at most
    /// `temp_drop_window_hours`.
    pub temp_drop_threshold: f64,
    pub temp_drop_window_hours: usize,
}

impl Default for FrontDetectionParams {
    fn default() -> Self {
        FrontDetectionParams {
            window_hours: 6,
            pressure_tendency_threshold: 1.0,
            veer_threshold_deg: 45.0,
            temp_drop_threshold: 4.0,
            temp_drop_window_hours: 3,
        }
    }
}

impl FrontDetectionParams {
    fn validate(&self) -> Result<(), DiagnosticsError> {
        if self.window_hours < 1 {
            return Err(DiagnosticsError::InvalidWindow(
                "window_hours must be >= 1".into(),
            ));
        }
        if self.temp_drop_window_hours < 1 || self.temp_drop_window_hours > self.window_hours {
            return Err(DiagnosticsError::InvalidWindow(format!(
                "temp_drop_window_hours must be in [1, window_hours], got {}",
                self.temp_drop_window_hours
            )));
        }
        if self.pressure_tendency_threshold <= 0.0 {
            return Err(DiagnosticsError::NonPositiveThreshold(
                "pressure_tendency_threshold",
            ));
        }
        if self.veer_threshold_deg <= 0.0 {
            return Err(DiagnosticsError::NonPositiveThreshold("veer_threshold_deg"));
        }
        if self.temp_drop_threshold <= 0.0 {
            return Err(DiagnosticsError::NonPositiveThreshold(
                "temp_drop_threshold",
            ));
        }
        Ok(())
    }
}

/// Backward finite-difference pressure tendency in hPa/h.
/// `tendency[i] = (pressure[i] - pressure[i - window_h]) / window_h` for
/// `i >= window_h`; the first `window_h` entries are undefined (`None`).
pub fn pressure_tendency(
    series: &ForecastSeries,
    window_h: usize,
) -> Result<Vec<Option<f64>>, DiagnosticsError> {
    if window_h < 1 {
        return Err(DiagnosticsError::InvalidWindow(
            "window_h must be >= 1".into(),
        ));
    }
    let n = series.samples.len();
    if n <= window_h {
        return Err(DiagnosticsError::SeriesTooShort {
            required: window_h + 1,
            actual: n,
        });
    }
    let mut out = vec![None; n];
    for (i, slot) in out.iter_mut().enumerate().skip(window_h) {
        let dp = series.samples[i].pressure - series.samples[i - window_h].pressure;
        *slot = Some(dp / window_h as f64);
    }
    Ok(out)
}

/// Largest temperature drop over any sub-interval of at most `max_span`
/// samples inside `[lo, hi]` (inclusive sample indices). A drop is the
/// earlier temperature minus the later one, so positive means cooling.
fn max_temp_drop(series: &ForecastSeries, lo: usize, hi: usize, max_span: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a in lo..hi {
        let upper = (a + max_span).min(hi);
        for b in (a + 1)..=upper {
            let drop = series.samples[a].temperature - series.samples[b].temperature;
            if drop > best {
                best = drop;
            }
        }
    }
    best
}

/// Slides a window of `params.window_hours` across the series and emits a
/// cold-front event wherever the pressure, rotation, and temperature
/// conditions all fire; overlapping firing windows merge into one event
/// spanning the earliest start and latest end.
pub fn detect_fronts(
    series: &ForecastSeries,
    params: &FrontDetectionParams,
) -> Result<Vec<FrontEvent>, DiagnosticsError> {
    params.validate()?;
    let n = series.samples.len();
    if n < 12 {
        return Err(DiagnosticsError::SeriesTooShort {
            required: 12,
            actual: n,
        });
    }
    let w = params.window_hours;
    if n <= w {
        return Err(DiagnosticsError::SeriesTooShort {
            required: w + 1,
            actual: n,
        });
    }

    let tendency = pressure_tendency(series, 1)?;
    let directions: Vec<f64> = series.samples.iter().map(|s| s.wind_dir).collect();

    // Window starting at i covers samples [i, i + w].
    let mut firing: Vec<usize> = Vec::new();
    for i in 0..=(n - 1 - w) {
        let min_tendency = (i + 1..=i + w)
            .map(|j| tendency[j].expect("defined for j >= 1"))
            .fold(f64::INFINITY, f64::min);
        if min_tendency > -params.pressure_tendency_threshold {
            continue;
        }
        let veer = accumulate_rotation(&directions[i..=i + w])?;
        if veer.abs() < params.veer_threshold_deg {
            continue;
        }
        let drop = max_temp_drop(series, i, i + w, params.temp_drop_window_hours);
        if drop < params.temp_drop_threshold {
            continue;
        }
        firing.push(i);
    }

    // Two firing windows overlap iff their start indices differ by <= w.
    let mut events = Vec::new();
    let mut group_start = 0;
    while group_start < firing.len() {
        let mut group_end = group_start;
        while group_end + 1 < firing.len() && firing[group_end + 1] - firing[group_end] <= w {
            group_end += 1;
        }
        let lo = firing[group_start];
        let hi = firing[group_end] + w;

        let mut min_tendency = f64::INFINITY;
        let mut onset_idx = lo + 1;
        for (j, entry) in tendency.iter().enumerate().take(hi + 1).skip(lo + 1) {
            let t = entry.expect("defined for j >= 1");
            if t < min_tendency {
                min_tendency = t;
                onset_idx = j;
            }
        }
        let mut veer_total = 0.0_f64;
        for &i in &firing[group_start..=group_end] {
            let veer = accumulate_rotation(&directions[i..=i + w])?;
            if veer.abs() > veer_total.abs() {
                veer_total = veer;
            }
        }
        let drop = max_temp_drop(series, lo, hi, params.temp_drop_window_hours);

        let ratio = |observed: f64, threshold: f64| (observed / threshold).min(1.0);
        let evidence_score = (ratio(min_tendency.abs(), params.pressure_tendency_threshold)
            + ratio(veer_total.abs(), params.veer_threshold_deg)
            + ratio(drop, params.temp_drop_threshold))
            / 3.0;

        events.push(FrontEvent {
            kind: FrontKind::ColdFront,
            onset: series.samples[onset_idx].timestamp,
            window_start: series.samples[lo].timestamp,
            window_end: series.samples[hi].timestamp,
            pressure_tendency_min: min_tendency,
            wind_veer_total: veer_total,
            temp_drop: drop,
            evidence_score,
        });
        group_start = group_end + 1;
    }
    Ok(events)
}
