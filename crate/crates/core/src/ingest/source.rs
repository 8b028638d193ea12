//! Data source selection: recorded fixture files or live HTTP endpoints.

use std::path::{Path, PathBuf};

use super::{IngestError, LocationRef};

/// Unit system a forecast payload was recorded or requested with.
/// Parsing always normalizes into the internal metric set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitSystem {
    /// Kelvin, m/s (provider default).
    Standard,
    /// °C, m/s.
    Metric,
    /// °F, mph.
    Imperial,
}

impl UnitSystem {
    pub fn as_query_value(&self) -> &'static str {
        match self {
            UnitSystem::Standard => "standard",
            UnitSystem::Metric => "metric",
            UnitSystem::Imperial => "imperial",
        }
    }
}

impl std::str::FromStr for UnitSystem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(UnitSystem::Standard),
            "metric" => Ok(UnitSystem::Metric),
            "imperial" => Ok(UnitSystem::Imperial),
            other => Err(format!("unknown unit system `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub enum SourceMode {
    Fixture {
        path: PathBuf,
    },
    Live {
        endpoint: String,
        api_key: Option<String>,
        /// Extra attempts after the first on transport failure.
        retry: u32,
    },
}

/// Where and how to read one input stream.
#[derive(Debug, Clone)]
pub struct DataSourceConfig {
    pub mode: SourceMode,
    pub units: UnitSystem,
}

impl DataSourceConfig {
    pub fn fixture(path: impl Into<PathBuf>) -> Self {
        DataSourceConfig {
            mode: SourceMode::Fixture { path: path.into() },
            units: UnitSystem::Metric,
        }
    }

    pub fn fixture_with_units(path: impl Into<PathBuf>, units: UnitSystem) -> Self {
        DataSourceConfig {
            mode: SourceMode::Fixture { path: path.into() },
            units,
        }
    }

    pub fn live(endpoint: impl Into<String>, api_key: Option<String>, units: UnitSystem) -> Self {
        DataSourceConfig {
            mode: SourceMode::Live {
                endpoint: endpoint.into(),
                api_key,
                retry: 1,
            },
            units,
        }
    }

    pub fn is_fixture(&self) -> bool {
        matches!(self.mode, SourceMode::Fixture { .. })
    }

    pub(crate) fn forecast_payload(&self, location: &LocationRef) -> Result<Vec<u8>, IngestError> {
        match &self.mode {
            SourceMode::Fixture { path } => load_fixture(path),
            SourceMode::Live {
                endpoint,
                api_key,
                retry,
            } => {
                let key = api_key.as_deref().ok_or_else(|| {
                    IngestError::InvalidInput("forecast source requires an API key".into())
                })?;
                let url = format!(
                    "{endpoint}?lat={}&lon={}&units={}&exclude=minutely,daily,alerts&appid={key}",
                    location.latitude,
                    location.longitude,
                    self.units.as_query_value(),
                );
                http_get(&url, &[], *retry)
            }
        }
    }

    pub(crate) fn climatology_payload(
        &self,
        location: &LocationRef,
    ) -> Result<Vec<u8>, IngestError> {
        match &self.mode {
            SourceMode::Fixture { path } => load_fixture(path),
            SourceMode::Live {
                endpoint,
                api_key,
                retry,
            } => {
                let url = format!(
                    "{endpoint}?lat={}&lon={}",
                    location.latitude, location.longitude
                );
                let mut headers = Vec::new();
                if let Some(key) = api_key.as_deref() {
                    headers.push(("x-rapidapi-key", key));
                }
                http_get(&url, &headers, *retry)
            }
        }
    }

    pub(crate) fn geo_payload(&self, location: &LocationRef) -> Result<Vec<u8>, IngestError> {
        match &self.mode {
            SourceMode::Fixture { path } => load_fixture(path),
            SourceMode::Live {
                endpoint, retry, ..
            } => {
                let url = format!(
                    "{endpoint}?lat={}&lon={}&format=jsonv2&addressdetails=1&extratags=1",
                    location.latitude, location.longitude
                );
                http_get(&url, &[("User-Agent", "wxreport/0.1")], *retry)
            }
        }
    }
}

/// Reads a fixture file's exact recorded bytes.
pub fn load_fixture(path: impl AsRef<Path>) -> Result<Vec<u8>, IngestError> {
    let path = path.as_ref();
    let meta = std::fs::metadata(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if !meta.is_file() {
        return Err(IngestError::InvalidInput(format!(
            "fixture path {} is not a regular file",
            path.display()
        )));
    }
    std::fs::read(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn http_get(url: &str, headers: &[(&str, &str)], retry: u32) -> Result<Vec<u8>, IngestError> {
    let mut last_err = IngestError::Http {
        status: None,
        message: "no attempt made".into(),
    };
    for _ in 0..=retry {
        let mut request = ureq::get(url);
        for (name, value) in headers {
            request = request.set(name, value);
        }
        match request.call() {
            Ok(response) => {
                let mut bytes = Vec::new();
                response
                    .into_reader()
                    .read_to_end(&mut bytes)
                    .map_err(|e| IngestError::Http {
                        status: None,
                        message: format!("body read failed: {e}"),
                    })?;
                return Ok(bytes);
            }
            Err(ureq::Error::Status(status, response)) => {
                // Client errors will not improve on retry.
                let message = response.into_string().unwrap_or_default();
                let err = IngestError::Http {
                    status: Some(status),
                    message,
                };
                if status < 500 {
                    return Err(err);
                }
                last_err = err;
            }
            Err(ureq::Error::Transport(t)) => {
                last_err = IngestError::Http {
                    status: None,
                    message: t.to_string(),
                };
            }
        }
    }
    Err(last_err)
}

use std::io::Read;
