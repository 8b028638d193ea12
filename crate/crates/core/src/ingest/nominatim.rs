//! Parser for reverse-geocode payloads (`address`, `class`, `type`) and
//! the tag → region/terrain mapping table.
//!
//! Mapping rules:
//! - `place` ∈ {city, town, suburb} → urban; ∈ {village, hamlet, farm} → rural
//! - `natural=coastline`, or a distance-to-coast field < 10 km → coastal
//! - elevation > 1500 m → mountain
//! - classified but neither coastal nor mountain → inland; no usable tags → unknown

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{GeoContext, IngestError, LocationRef, RegionKind, TerrainKind};

const URBAN_PLACES: [&str; 3] = ["city", "town", "suburb"];
const RURAL_PLACES: [&str; 3] = ["village", "hamlet", "farm"];
const COASTAL_DISTANCE_KM: f64 = 10.0;
const MOUNTAIN_ELEVATION_M: f64 = 1500.0;

#[derive(Deserialize)]
struct ReverseGeocodePayload {
    display_name: Option<String>,
    class: Option<String>,
    #[serde(rename = "type")]
    kind: Option<String>,
    #[serde(default)]
    address: BTreeMap<String, String>,
    #[serde(default)]
    extratags: BTreeMap<String, String>,
    distance_to_coast_km: Option<f64>,
}

/// Applies the mapping table to a reverse-geocode payload. Classifications
/// the payload cannot support become `Unknown`; only transport or schema
/// problems are errors.
pub fn parse_geo_context(bytes: &[u8], location: &LocationRef) -> Result<GeoContext, IngestError> {
    let payload: ReverseGeocodePayload =
        serde_json::from_slice(bytes).map_err(|e| IngestError::Schema(e.to_string()))?;

    let place_tag = match (payload.class.as_deref(), payload.kind.as_deref()) {
        (Some("place"), Some(kind)) => Some(kind.to_string()),
        _ => URBAN_PLACES
            .iter()
            .chain(RURAL_PLACES.iter())
            .find(|key| payload.address.contains_key(**key))
            .map(|key| key.to_string()),
    };
    let region_kind = match place_tag.as_deref() {
        Some(tag) if URBAN_PLACES.contains(&tag) => RegionKind::Urban,
        Some(tag) if RURAL_PLACES.contains(&tag) => RegionKind::Rural,
        _ => RegionKind::Unknown,
    };

    let elevation = payload
        .extratags
        .get("ele")
        .and_then(|v| v.parse::<f64>().ok());
    let coastline_tag =
        payload.class.as_deref() == Some("natural") && payload.kind.as_deref() == Some("coastline");
    let near_coast = payload
        .distance_to_coast_km
        .map(|d| d < COASTAL_DISTANCE_KM)
        .unwrap_or(false);

    let terrain_kind = if coastline_tag || near_coast {
        TerrainKind::Coastal
    } else if elevation.map(|e| e > MOUNTAIN_ELEVATION_M).unwrap_or(false) {
        TerrainKind::Mountain
    } else if region_kind != RegionKind::Unknown {
        TerrainKind::Inland
    } else {
        TerrainKind::Unknown
    };

    let place_name = ["city", "town", "village", "hamlet", "suburb", "county"]
        .iter()
        .find_map(|key| payload.address.get(*key).cloned())
        .or_else(|| {
            payload
                .display_name
                .as_deref()
                .and_then(|d| d.split(',').next())
                .map(|s| s.trim().to_string())
        })
        .unwrap_or_else(|| location.name.clone());

    Ok(GeoContext {
        place_name,
        latitude: location.latitude,
        longitude: location.longitude,
        region_kind,
        terrain_kind,
        elevation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn location() -> LocationRef {
        LocationRef {
            name: "Requested Name".into(),
            latitude: 43.0,
            longitude: 9.9,
            utc_offset_seconds: 0,
        }
    }

    #[test]
    fn place_city_maps_to_urban() {
        let payload = r#"{"class": "place", "type": "city",
            "display_name": "Bigtown, Somewhere",
            "address": {"city": "Bigtown", "country": "Nowhere"}}"#;
        let geo = parse_geo_context(payload.as_bytes(), &location()).unwrap();
        assert_eq!(geo.region_kind, RegionKind::Urban);
        assert_eq!(geo.terrain_kind, TerrainKind::Inland);
        assert_eq!(geo.place_name, "Bigtown");
    }

    #[test]
    fn village_with_high_elevation_is_rural_mountain() {
        let payload = r#"{"class": "place", "type": "village",
            "address": {"village": "Alpdorf"},
            "extratags": {"ele": "2300"}}"#;
        let geo = parse_geo_context(payload.as_bytes(), &location()).unwrap();
        assert_eq!(geo.region_kind, RegionKind::Rural);
        assert_eq!(geo.terrain_kind, TerrainKind::Mountain);
        assert_eq!(geo.elevation, Some(2300.0));
    }

    #[test]
    fn distance_to_coast_under_ten_km_is_coastal() {
        let payload = r#"{"class": "place", "type": "town",
            "address": {"town": "Seaside"}, "distance_to_coast_km": 0.4}"#;
        let geo = parse_geo_context(payload.as_bytes(), &location()).unwrap();
        assert_eq!(geo.terrain_kind, TerrainKind::Coastal);
    }

    #[test]
    fn no_class_tags_degrade_to_unknown() {
        let payload = r#"{"class": "boundary", "type": "administrative",
            "address": {"country": "Nowhere"}}"#;
        let geo = parse_geo_context(payload.as_bytes(), &location()).unwrap();
        assert_eq!(geo.region_kind, RegionKind::Unknown);
        assert_eq!(geo.terrain_kind, TerrainKind::Unknown);
        assert_eq!(geo.place_name, "Requested Name");
    }

    #[test]
    fn unparseable_elevation_is_ignored_not_fatal() {
        let payload = r#"{"class": "place", "type": "hamlet",
            "address": {"hamlet": "Tiny"}, "extratags": {"ele": "unknown"}}"#;
        let geo = parse_geo_context(payload.as_bytes(), &location()).unwrap();
        assert_eq!(geo.elevation, None);
        assert_eq!(geo.terrain_kind, TerrainKind::Inland);
    }

    #[test]
    fn malformed_payload_is_schema_error() {
        assert!(matches!(
            parse_geo_context(b"not json", &location()).unwrap_err(),
            IngestError::Schema(_)
        ));
    }
}
