//! Circular arithmetic on wind directions.

use crate::ingest::ForecastSeries;

use super::DiagnosticsError;

/// Signed angular difference `to - from`, wrapped into (−180, +180].
/// Positive values are veering (clockwise rotation); an exactly opposite
/// direction maps to +180 by the half-open interval.
pub fn circular_diff(from_deg: f64, to_deg: f64) -> Result<f64, DiagnosticsError> {
    if !from_deg.is_finite() || !to_deg.is_finite() {
        return Err(DiagnosticsError::NonFinite("direction"));
    }
    let wrapped = (to_deg - from_deg).rem_euclid(360.0);
    Ok(if wrapped > 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    })
}

/// Accumulated signed rotation across consecutive samples whose timestamps
/// fall inside `[start_ts, end_ts]` (inclusive). The per-step differences
/// are summed, so a 350° → 10° → 30° path yields +40, not −320.
pub fn wind_veer(
    series: &ForecastSeries,
    start_ts: i64,
    end_ts: i64,
) -> Result<f64, DiagnosticsError> {
    let directions: Vec<f64> = series
        .samples
        .iter()
        .filter(|s| s.timestamp >= start_ts && s.timestamp <= end_ts)
        .map(|s| s.wind_dir)
        .collect();
    if directions.len() < 2 {
        return Err(DiagnosticsError::InvalidWindow(format!(
            "window [{start_ts}, {end_ts}] contains {} samples, need at least 2",
            directions.len()
        )));
    }
    accumulate_rotation(&directions)
}

pub(super) fn accumulate_rotation(directions: &[f64]) -> Result<f64, DiagnosticsError> {
    let mut total = 0.0;
    for pair in directions.windows(2) {
        total += circular_diff(pair[0], pair[1])?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{HourlySample, LocationRef};

    #[test]
    fn wraparound_is_symmetric() {
        assert_eq!(circular_diff(350.0, 10.0).unwrap(), 20.0);
        assert_eq!(circular_diff(10.0, 350.0).unwrap(), -20.0);
    }

    #[test]
    fn exactly_opposite_maps_to_plus_180() {
        assert_eq!(circular_diff(0.0, 180.0).unwrap(), 180.0);
    }

    #[test]
    fn non_finite_input_rejected() {
        assert_eq!(
            circular_diff(f64::NAN, 0.0).unwrap_err(),
            DiagnosticsError::NonFinite("direction")
        );
    }

    fn series_with_directions(dirs: &[f64]) -> ForecastSeries {
        let samples: Vec<_> = dirs
            .iter()
            .enumerate()
            .map(|(i, &d)| HourlySample {
                timestamp: 3600 * i as i64,
                temperature: 15.0,
                feels_like: 15.0,
                dew_point: 8.0,
                humidity: 60.0,
                pressure: 1013.0,
                wind_speed: 5.0,
                wind_gust: None,
                wind_dir: d,
                precipitation: 0.0,
                cloud_cover: 20.0,
                visibility: 10000.0,
                uv_index: 1.0,
                condition_code: 800,
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

    #[test]
    fn veer_accumulates_quarter_turn() {
        let series = series_with_directions(&[225.0, 270.0, 315.0]);
        assert_eq!(wind_veer(&series, 0, 7200).unwrap(), 90.0);
    }

    #[test]
    fn backing_accumulates_negative() {
        let series = series_with_directions(&[10.0, 350.0, 330.0]);
        assert_eq!(wind_veer(&series, 0, 7200).unwrap(), -40.0);
    }

    #[test]
    fn opposing_half_turns_accumulate() {
        // Each exactly-opposite step maps to +180 by the half-open
        // interval, so 0 → 180 → 0 accumulates +360: the signed total is
        // the path sum, never the net displacement.
        let series = series_with_directions(&[0.0, 180.0, 0.0]);
        assert_eq!(wind_veer(&series, 0, 7200).unwrap(), 360.0);
        let path_sum = circular_diff(0.0, 180.0).unwrap() + circular_diff(180.0, 0.0).unwrap();
        assert_eq!(wind_veer(&series, 0, 7200).unwrap(), path_sum);
    }

    #[test]
    fn degenerate_window_is_rejected() {
        let series = series_with_directions(&[10.0, 20.0, 30.0]);
        assert!(matches!(
            wind_veer(&series, 0, 0).unwrap_err(),
            DiagnosticsError::InvalidWindow(_)
        ));
    }
}
