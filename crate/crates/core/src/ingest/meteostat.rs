//! Parser for the monthly-normals wire format (per-month `tavg`, `prcp`).

use serde::Deserialize;

use super::{ClimatologyNormals, IngestError, MonthlyNormal};

#[derive(Deserialize)]
struct NormalsPayload {
    data: Vec<NormalsMonth>,
}

#[derive(Deserialize)]
struct NormalsMonth {
    month: u32,
    start: i32,
    end: i32,
    tavg: f64,
    prcp: f64,
    /// Dispersion extension; live normals endpoints usually omit it, in
    /// which case anomaly scoring falls back to threshold mode.
    tstd: Option<f64>,
}

/// Parses a monthly-normals payload into validated [`ClimatologyNormals`].
pub fn parse_climatology(bytes: &[u8]) -> Result<ClimatologyNormals, IngestError> {
    let payload: NormalsPayload =
        serde_json::from_slice(bytes).map_err(|e| IngestError::Schema(e.to_string()))?;

    let months = payload
        .data
        .iter()
        .map(|m| {
            let span = m.end - m.start + 1;
            MonthlyNormal {
                month: m.month,
                mean_temperature: m.tavg,
                temperature_std: m.tstd,
                total_precipitation: m.prcp,
                baseline_years: span.max(0) as u32,
            }
        })
        .collect();
    ClimatologyNormals::new(months)
}
