//! Acquisition and validation of the three input data streams: hourly
//! forecasts, climatological normals, and geographic context.
//!
//! Each stream can be served from a live HTTP endpoint or a recorded
//! fixture file; fixture mode is the default in tests and produces
//! identical domain objects across runs. All parsing is strict: a payload
//! either yields a validated domain object or a classified [`IngestError`].

mod meteostat;
mod nominatim;
mod openweather;
mod source;

pub use meteostat::parse_climatology;
pub use nominatim::parse_geo_context;
pub use openweather::parse_forecast;
pub use source::{load_fixture, DataSourceConfig, SourceMode, UnitSystem};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from ingestion: transport, schema, and invariant violations are
/// kept distinct so callers can classify failures without string matching.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("http failure{}: {message}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    Http {
        status: Option<u16>,
        message: String,
    },
    #[error("io failure for {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("payload schema mismatch: {0}")]
    Schema(String),
    #[error("invariant violation on `{field}`{}: {message}", timestamp.map(|t| format!(" at {}", crate::context::format_utc(t))).unwrap_or_default())]
    Invariant {
        field: &'static str,
        timestamp: Option<i64>,
        message: String,
    },
    #[error("gap in hourly coverage: missing sample at {}", crate::context::format_utc(*missing_timestamp))]
    Gap { missing_timestamp: i64 },
    #[error("incomplete normals: {months_present} of 12 months present")]
    IncompleteNormals { months_present: usize },
}

/// A named point on the globe plus its UTC offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationRef {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub utc_offset_seconds: i32,
}

impl LocationRef {
    pub fn validate(&self) -> Result<(), IngestError> {
        if !self.latitude.is_finite() || !(-90.0..=90.0).contains(&self.latitude) {
            return Err(IngestError::InvalidInput(format!(
                "latitude {} out of [-90, 90]",
                self.latitude
            )));
        }
        if !self.longitude.is_finite() || !(-180.0..=180.0).contains(&self.longitude) {
            return Err(IngestError::InvalidInput(format!(
                "longitude {} out of [-180, 180]",
                self.longitude
            )));
        }
        Ok(())
    }
}

/// One hour of forecast data in the internal unit system:
/// °C, hPa, m/s, mm/h, meters, UTC epoch seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySample {
    pub timestamp: i64,
    pub temperature: f64,
    pub feels_like: f64,
    pub dew_point: f64,
    pub humidity: f64,
    pub pressure: f64,
    pub wind_speed: f64,
    pub wind_gust: Option<f64>,
    pub wind_dir: f64,
    pub precipitation: f64,
    pub cloud_cover: f64,
    pub visibility: f64,
    pub uv_index: f64,
    pub condition_code: i64,
}

impl HourlySample {
    /// Checks every field-bound invariant; errors name the offending field
    /// and the sample timestamp.
    pub fn validate(&self) -> Result<(), IngestError> {
        let checks: [(&'static str, f64, bool); 10] = [
            (
                "temperature",
                self.temperature,
                self.temperature.is_finite(),
            ),
            ("feels_like", self.feels_like, self.feels_like.is_finite()),
            ("dew_point", self.dew_point, self.dew_point.is_finite()),
            (
                "humidity",
                self.humidity,
                (0.0..=100.0).contains(&self.humidity),
            ),
            (
                "pressure",
                self.pressure,
                (850.0..=1100.0).contains(&self.pressure),
            ),
            ("wind_speed", self.wind_speed, self.wind_speed >= 0.0),
            (
                "wind_dir",
                self.wind_dir,
                (0.0..360.0).contains(&self.wind_dir),
            ),
            (
                "precipitation",
                self.precipitation,
                self.precipitation >= 0.0,
            ),
            (
                "cloud_cover",
                self.cloud_cover,
                (0.0..=100.0).contains(&self.cloud_cover),
            ),
            ("visibility", self.visibility, self.visibility >= 0.0),
        ];
        for (field, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(IngestError::Invariant {
                    field,
                    timestamp: Some(self.timestamp),
                    message: format!("value {value} out of bounds"),
                });
            }
        }
        if !(self.uv_index.is_finite() && self.uv_index >= 0.0) {
            return Err(IngestError::Invariant {
                field: "uv_index",
                timestamp: Some(self.timestamp),
                message: format!("value {} out of bounds", self.uv_index),
            });
        }
        if let Some(g) = self.wind_gust {
            if !(g.is_finite() && g >= 0.0) {
                return Err(IngestError::Invariant {
                    field: "wind_gust",
                    timestamp: Some(self.timestamp),
                    message: format!("value {g} out of bounds"),
                });
            }
        }
        Ok(())
    }

    /// Value of a named forecast parameter, if the sample carries it.
    pub fn parameter(&self, name: &str) -> Option<f64> {
        match name {
            "temperature" => Some(self.temperature),
            "feels_like" => Some(self.feels_like),
            "dew_point" => Some(self.dew_point),
            "humidity" => Some(self.humidity),
            "pressure" => Some(self.pressure),
            "wind_speed" => Some(self.wind_speed),
            "wind_gust" => self.wind_gust,
            "wind_dir" => Some(self.wind_dir),
            "precipitation" => Some(self.precipitation),
            "cloud_cover" => Some(self.cloud_cover),
            "visibility" => Some(self.visibility),
            "uv_index" => Some(self.uv_index),
            _ => None,
        }
    }
}

/// The full forecast parameter set carried by every [`HourlySample`].
pub const PARAMETER_NAMES: [&str; 12] = [
    "temperature",
    "feels_like",
    "dew_point",
    "humidity",
    "pressure",
    "wind_speed",
    "wind_gust",
    "wind_dir",
    "precipitation",
    "cloud_cover",
    "visibility",
    "uv_index",
];

/// An hourly multi-parameter forecast time series with strictly uniform
/// 3600 s spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSeries {
    pub location: LocationRef,
    pub samples: Vec<HourlySample>,
    pub horizon_hours: u32,
}

impl ForecastSeries {
    pub fn new(location: LocationRef, samples: Vec<HourlySample>) -> Result<Self, IngestError> {
        let horizon_hours = samples.len() as u32;
        let series = ForecastSeries {
            location,
            samples,
            horizon_hours,
        };
        series.validate()?;
        Ok(series)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        self.location.validate()?;
        if self.samples.is_empty() || self.samples.len() > 120 {
            return Err(IngestError::Invariant {
                field: "samples",
                timestamp: None,
                message: format!("series length {} out of [1, 120]", self.samples.len()),
            });
        }
        for pair in self.samples.windows(2) {
            let dt = pair[1].timestamp - pair[0].timestamp;
            if dt > 3600 {
                return Err(IngestError::Gap {
                    missing_timestamp: pair[0].timestamp + 3600,
                });
            }
            if dt != 3600 {
                return Err(IngestError::Invariant {
                    field: "timestamp",
                    timestamp: Some(pair[1].timestamp),
                    message: format!("expected +3600 s spacing, got {dt} s"),
                });
            }
        }
        for sample in &self.samples {
            sample.validate()?;
        }
        Ok(())
    }

    /// Canonical internal form. Unit conversion happens at the parser
    /// boundary; this pass only wraps wind directions into [0, 360).
    /// Applying it to an already-canonical series is the identity.
    pub fn canonicalize(mut self) -> Self {
        for sample in &mut self.samples {
            sample.wind_dir = sample.wind_dir.rem_euclid(360.0);
        }
        self
    }

    /// Keeps the first `horizon_hours` samples.
    pub fn truncate(mut self, horizon_hours: u32) -> Self {
        self.samples.truncate(horizon_hours as usize);
        self.horizon_hours = self.samples.len() as u32;
        self
    }

    pub fn start_timestamp(&self) -> i64 {
        self.samples.first().map(|s| s.timestamp).unwrap_or(0)
    }

    pub fn end_timestamp(&self) -> i64 {
        self.samples.last().map(|s| s.timestamp).unwrap_or(0)
    }
}

/// Long-term monthly baseline for one calendar month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyNormal {
    pub month: u32,
    pub mean_temperature: f64,
    pub temperature_std: Option<f64>,
    pub total_precipitation: f64,
    pub baseline_years: u32,
}

/// Exactly twelve monthly normals, sorted by month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClimatologyNormals {
    months: Vec<MonthlyNormal>,
}

impl ClimatologyNormals {
    pub fn new(mut months: Vec<MonthlyNormal>) -> Result<Self, IngestError> {
        months.sort_by_key(|m| m.month);
        if months.len() < 12 {
            return Err(IngestError::IncompleteNormals {
                months_present: months.len(),
            });
        }
        for (i, m) in months.iter().enumerate() {
            if m.month != i as u32 + 1 {
                return Err(IngestError::Invariant {
                    field: "month",
                    timestamp: None,
                    message: format!("months must be the unique set 1..=12, saw {}", m.month),
                });
            }
            if !(m.mean_temperature.is_finite()) {
                return Err(IngestError::Invariant {
                    field: "mean_temperature",
                    timestamp: None,
                    message: format!("non-finite value for month {}", m.month),
                });
            }
            if !(m.total_precipitation.is_finite() && m.total_precipitation >= 0.0) {
                return Err(IngestError::Invariant {
                    field: "total_precipitation",
                    timestamp: None,
                    message: format!(
                        "value {} for month {} must be >= 0",
                        m.total_precipitation, m.month
                    ),
                });
            }
            if let Some(std) = m.temperature_std {
                if !(std.is_finite() && std >= 0.0) {
                    return Err(IngestError::Invariant {
                        field: "temperature_std",
                        timestamp: None,
                        message: format!("value {std} for month {} must be >= 0", m.month),
                    });
                }
            }
            if m.baseline_years < 1 {
                return Err(IngestError::Invariant {
                    field: "baseline_years",
                    timestamp: None,
                    message: format!("month {} has baseline_years < 1", m.month),
                });
            }
        }
        Ok(ClimatologyNormals { months })
    }

    /// Normal for calendar month 1..=12.
    pub fn month(&self, month: u32) -> Option<&MonthlyNormal> {
        self.months.get(month.checked_sub(1)? as usize)
    }

    pub fn months(&self) -> &[MonthlyNormal] {
        &self.months
    }

    pub fn baseline_years(&self) -> u32 {
        self.months
            .iter()
            .map(|m| m.baseline_years)
            .min()
            .unwrap_or(0)
    }

    /// True when every listed month carries a temperature dispersion
    /// estimate, enabling z-score anomaly mode for the spanned months.
    pub fn has_dispersion(&self, months: impl IntoIterator<Item = u32>) -> bool {
        months.into_iter().all(|m| {
            self.month(m)
                .map(|n| n.temperature_std.is_some())
                .unwrap_or(false)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Urban,
    Rural,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainKind {
    Coastal,
    Inland,
    Mountain,
    Unknown,
}

impl std::fmt::Display for RegionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegionKind::Urban => "urban",
            RegionKind::Rural => "rural",
            RegionKind::Unknown => "unknown",
        })
    }
}

impl std::fmt::Display for TerrainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TerrainKind::Coastal => "coastal",
            TerrainKind::Inland => "inland",
            TerrainKind::Mountain => "mountain",
            TerrainKind::Unknown => "unknown",
        })
    }
}

/// Geographic metadata for the requested point. Classifications that the
/// payload cannot support degrade to `Unknown`, never to a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoContext {
    pub place_name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub region_kind: RegionKind,
    pub terrain_kind: TerrainKind,
    pub elevation: Option<f64>,
}

/// Fetches and validates a forecast series. In fixture mode the result is
/// deterministic; units are normalized to the internal set regardless of
/// the unit system the payload was recorded with.
pub fn fetch_forecast(
    location: &LocationRef,
    source: &DataSourceConfig,
) -> Result<ForecastSeries, IngestError> {
    location.validate()?;
    let bytes = source.forecast_payload(location)?;
    parse_forecast(&bytes, source.units, location)
}

/// Fetches and validates monthly climatological normals (°C, mm).
pub fn fetch_climatology(
    location: &LocationRef,
    source: &DataSourceConfig,
) -> Result<ClimatologyNormals, IngestError> {
    location.validate()?;
    let bytes = source.climatology_payload(location)?;
    parse_climatology(&bytes)
}

/// Fetches reverse-geocode metadata and applies the tag mapping table.
pub fn fetch_geo_context(
    location: &LocationRef,
    source: &DataSourceConfig,
) -> Result<GeoContext, IngestError> {
    location.validate()?;
    let bytes = source.geo_payload(location)?;
    parse_geo_context(&bytes, location)
}
