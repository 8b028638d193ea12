//! Parser for the One Call 2.5 forecast wire format.

use serde::Deserialize;

use super::source::UnitSystem;
use super::{ForecastSeries, HourlySample, IngestError, LocationRef};

#[derive(Deserialize)]
struct OneCallPayload {
    timezone_offset: Option<i32>,
    hourly: Vec<OneCallHourly>,
}

#[derive(Deserialize)]
struct OneCallHourly {
    dt: i64,
    temp: f64,
    feels_like: f64,
    dew_point: f64,
    pressure: f64,
    humidity: f64,
    wind_speed: f64,
    wind_deg: f64,
    wind_gust: Option<f64>,
    clouds: f64,
    visibility: f64,
    uvi: f64,
    rain: Option<PrecipVolume>,
    snow: Option<PrecipVolume>,
    weather: Vec<WeatherTag>,
}

#[derive(Deserialize)]
struct PrecipVolume {
    #[serde(rename = "1h")]
    one_hour: f64,
}

#[derive(Deserialize)]
struct WeatherTag {
    id: i64,
}

fn temperature_to_celsius(value: f64, units: UnitSystem) -> f64 {
    match units {
        UnitSystem::Standard => value - 273.15,
        UnitSystem::Metric => value,
        UnitSystem::Imperial => (value - 32.0) * 5.0 / 9.0,
    }
}

fn speed_to_mps(value: f64, units: UnitSystem) -> f64 {
    match units {
        UnitSystem::Standard | UnitSystem::Metric => value,
        UnitSystem::Imperial => value * 0.44704,
    }
}

/// Parses a One Call 2.5 payload into a validated [`ForecastSeries`],
/// converting from the payload's unit system into °C / hPa / m/s / mm/h.
/// The payload's `timezone_offset` overrides the requested offset.
pub fn parse_forecast(
    bytes: &[u8],
    units: UnitSystem,
    location: &LocationRef,
) -> Result<ForecastSeries, IngestError> {
    let payload: OneCallPayload =
        serde_json::from_slice(bytes).map_err(|e| IngestError::Schema(e.to_string()))?;

    let mut samples = Vec::with_capacity(payload.hourly.len());
    for hour in &payload.hourly {
        let condition_code =
            hour.weather.first().map(|w| w.id).ok_or_else(|| {
                IngestError::Schema(format!("empty weather array at dt {}", hour.dt))
            })?;
        let precipitation = hour.rain.as_ref().map(|r| r.one_hour).unwrap_or(0.0)
            + hour.snow.as_ref().map(|s| s.one_hour).unwrap_or(0.0);
        samples.push(HourlySample {
            timestamp: hour.dt,
            temperature: temperature_to_celsius(hour.temp, units),
            feels_like: temperature_to_celsius(hour.feels_like, units),
            dew_point: temperature_to_celsius(hour.dew_point, units),
            humidity: hour.humidity,
            pressure: hour.pressure,
            wind_speed: speed_to_mps(hour.wind_speed, units),
            wind_gust: hour.wind_gust.map(|g| speed_to_mps(g, units)),
            wind_dir: hour.wind_deg,
            precipitation,
            cloud_cover: hour.clouds,
            visibility: hour.visibility,
            uv_index: hour.uvi,
            condition_code,
        });
    }

    let mut location = location.clone();
    if let Some(offset) = payload.timezone_offset {
        location.utc_offset_seconds = offset;
    }
    // Canonicalize before validating: providers encode due north as
    // either 0 or 360.
    let horizon_hours = samples.len() as u32;
    let series = ForecastSeries {
        location,
        samples,
        horizon_hours,
    }
    .canonicalize();
    series.validate()?;
    Ok(series)
}
