//! Climatological anomaly scoring: forecast aggregates against
//! hour-weighted blends of the monthly normals the series spans.
//!
//! When the normals carry a temperature dispersion estimate the score is a
//! z-score with a normal-CDF percentile; otherwise severity falls back to
//! fixed deviation bands (threshold mode), keeping the operation total.

use chrono::{DateTime, Datelike};
use serde::{Deserialize, Serialize};

use crate::ingest::{ClimatologyNormals, ForecastSeries};

use super::DiagnosticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyParameter {
    Temperature,
    Precipitation,
}

impl std::fmt::Display for AnomalyParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AnomalyParameter::Temperature => "temperature",
            AnomalyParameter::Precipitation => "precipitation",
        })
    }
}

impl std::str::FromStr for AnomalyParameter {
    type Err = DiagnosticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "temperature" => Ok(AnomalyParameter::Temperature),
            "precipitation" => Ok(AnomalyParameter::Precipitation),
            other => Err(DiagnosticsError::UnknownParameter(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalySeverity {
    None,
    Moderate,
    High,
}

impl std::fmt::Display for AnomalySeverity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AnomalySeverity::None => "none",
            AnomalySeverity::Moderate => "moderate",
            AnomalySeverity::High => "high",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub parameter: AnomalyParameter,
    pub forecast_aggregate: f64,
    pub baseline_mean: f64,
    /// Always exactly `forecast_aggregate - baseline_mean`.
    pub deviation: f64,
    /// Present iff the spanned normals carry a dispersion estimate.
    pub z_score: Option<f64>,
    /// Φ(z) × 100 under a normal assumption; present iff `z_score` is.
    pub percentile: Option<f64>,
    pub severity: AnomalySeverity,
}

/// Standard normal CDF via an error-function approximation
/// (max absolute error ~1.5e-7); exact at z = 0.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 => {
            if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 {
                29
            } else {
                28
            }
        }
        _ => unreachable!("month out of range"),
    }
}

fn sample_year_month(ts: i64) -> (i32, u32) {
    let dt = DateTime::from_timestamp(ts, 0).expect("valid epoch timestamp");
    (dt.year(), dt.month())
}

/// One calendar month touched by a series, with its sample count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonthSpan {
    pub month: u32,
    pub year: i32,
    pub samples: usize,
}

/// Calendar months a series touches, in order, with hour weights.
pub fn spanned_months(series: &ForecastSeries) -> Vec<MonthSpan> {
    let mut spans: Vec<MonthSpan> = Vec::new();
    for sample in &series.samples {
        let (year, month) = sample_year_month(sample.timestamp);
        match spans.last_mut() {
            Some(last) if last.month == month && last.year == year => last.samples += 1,
            _ => spans.push(MonthSpan {
                month,
                year,
                samples: 1,
            }),
        }
    }
    spans
}

/// Hour-weighted blend of the monthly normals a series spans.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyBlend {
    pub spans: Vec<MonthSpan>,
    pub temperature: f64,
    pub precipitation: f64,
    /// Present only when every spanned month carries a dispersion estimate.
    pub temperature_std: Option<f64>,
    /// Hour-weighted mean month length, hours.
    pub month_hours: f64,
}

/// Computes the hour-weighted blend over the months the series spans.
pub fn monthly_blend(
    series: &ForecastSeries,
    normals: &ClimatologyNormals,
) -> Result<MonthlyBlend, DiagnosticsError> {
    let n = series.samples.len();
    if n == 0 {
        return Err(DiagnosticsError::SeriesTooShort {
            required: 1,
            actual: 0,
        });
    }
    let spans = spanned_months(series);
    let span_count = n as f64;

    let mut temperature = 0.0;
    let mut precipitation = 0.0;
    let mut temperature_std = Some(0.0);
    let mut month_hours = 0.0;
    for span in &spans {
        let normal = normals
            .month(span.month)
            .ok_or(DiagnosticsError::MissingMonth(span.month))?;
        let weight = span.samples as f64;
        temperature += weight * normal.mean_temperature;
        precipitation += weight * normal.total_precipitation;
        temperature_std = match (temperature_std, normal.temperature_std) {
            (Some(acc), Some(std)) => Some(acc + weight * std),
            _ => None,
        };
        month_hours += weight * f64::from(days_in_month(span.year, span.month) * 24);
    }
    Ok(MonthlyBlend {
        spans,
        temperature: temperature / span_count,
        precipitation: precipitation / span_count,
        temperature_std: temperature_std.map(|s| s / span_count),
        month_hours: month_hours / span_count,
    })
}

/// Scores one parameter's forecast aggregate against the hour-weighted
/// blend of the monthly normals the series spans.
///
/// Temperature aggregates as the series mean; precipitation as the series
/// total scaled to a monthly-equivalent rate
/// (`total × hours_in_month / series_hours`).
pub fn anomaly_score(
    series: &ForecastSeries,
    normals: &ClimatologyNormals,
    parameter: AnomalyParameter,
) -> Result<AnomalyReport, DiagnosticsError> {
    let n = series.samples.len();
    if n == 0 {
        return Err(DiagnosticsError::SeriesTooShort {
            required: 1,
            actual: 0,
        });
    }
    let span_count = n as f64;
    let blend = monthly_blend(series, normals)?;

    let (forecast_aggregate, baseline_mean) = match parameter {
        AnomalyParameter::Temperature => {
            let mean = series.samples.iter().map(|s| s.temperature).sum::<f64>() / span_count;
            (mean, blend.temperature)
        }
        AnomalyParameter::Precipitation => {
            let total: f64 = series.samples.iter().map(|s| s.precipitation).sum();
            (
                total * (blend.month_hours / span_count),
                blend.precipitation,
            )
        }
    };
    let deviation = forecast_aggregate - baseline_mean;

    let z_mode_std = match parameter {
        AnomalyParameter::Temperature => blend.temperature_std.filter(|s| *s > 0.0),
        AnomalyParameter::Precipitation => None,
    };

    let (z_score, percentile, severity) = match z_mode_std {
        Some(std) => {
            let z = deviation / std;
            let severity = if z.abs() >= 2.0 {
                AnomalySeverity::High
            } else if z.abs() >= 1.0 {
                AnomalySeverity::Moderate
            } else {
                AnomalySeverity::None
            };
            (Some(z), Some(normal_cdf(z) * 100.0), severity)
        }
        None => {
            let severity = match parameter {
                AnomalyParameter::Temperature => {
                    if deviation.abs() >= 8.0 {
                        AnomalySeverity::High
                    } else if deviation.abs() >= 5.0 {
                        AnomalySeverity::Moderate
                    } else {
                        AnomalySeverity::None
                    }
                }
                AnomalyParameter::Precipitation => {
                    if baseline_mean <= 0.0 {
                        if forecast_aggregate > 0.0 {
                            AnomalySeverity::High
                        } else {
                            AnomalySeverity::None
                        }
                    } else {
                        let ratio = forecast_aggregate / baseline_mean;
                        if ratio >= 2.5 {
                            AnomalySeverity::High
                        } else if ratio >= 1.5 {
                            AnomalySeverity::Moderate
                        } else {
                            AnomalySeverity::None
                        }
                    }
                }
            };
            (None, None, severity)
        }
    };

    Ok(AnomalyReport {
        parameter,
        forecast_aggregate,
        baseline_mean,
        deviation,
        z_score,
        percentile,
        severity,
    })
}
