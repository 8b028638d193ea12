//! Pipeline configuration: a flat `key = value` file with `#` comments,
//! plus programmatic overrides (CLI flags win over file values).

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::agents::{Audience, PromptConfig, Tone, UserPrefs};
use crate::diagnostics::{FrontDetectionParams, HazardParams};
use crate::ingest::{DataSourceConfig, LocationRef, SourceMode, UnitSystem};

#[derive(Debug, Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceSetting {
    Live,
    Fixture,
}

impl std::str::FromStr for SourceSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(SourceSetting::Live),
            "fixture" => Ok(SourceSetting::Fixture),
            other => Err(format!("unknown source mode `{other}` (live, fixture)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderSetting {
    Live,
    Mock,
}

impl std::str::FromStr for ProviderSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(ProviderSetting::Live),
            "mock" => Ok(ProviderSetting::Mock),
            other => Err(format!("unknown provider `{other}` (live, mock)")),
        }
    }
}

/// Everything one pipeline run needs. Defaults are the documented
/// operational values; a config file and flag overrides adjust them.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub location: LocationRef,
    pub horizon_hours: u32,
    pub forecast_source: SourceSetting,
    pub climatology_source: SourceSetting,
    pub geo_source: SourceSetting,
    pub fixture_dir: Option<PathBuf>,
    pub forecast_fixture: String,
    pub climatology_fixture: String,
    pub geo_fixture: String,
    pub forecast_units: UnitSystem,
    pub forecast_endpoint: String,
    pub climatology_endpoint: String,
    pub geo_endpoint: String,
    pub provider: ProviderSetting,
    pub model: String,
    pub provider_base_url: String,
    pub mock_scripts_dir: Option<PathBuf>,
    pub prefs: UserPrefs,
    pub out_dir: PathBuf,
    pub pdf_command: Option<String>,
    /// Injected generation time; `None` means wall clock.
    pub clock_utc: Option<i64>,
    pub token_budget: usize,
    pub front_params: FrontDetectionParams,
    pub hazard_params: HazardParams,
    pub prompt_config: PromptConfig,
    pub debug_prompts: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            location: LocationRef {
                name: String::new(),
                latitude: 0.0,
                longitude: 0.0,
                utc_offset_seconds: 0,
            },
            horizon_hours: 48,
            forecast_source: SourceSetting::Fixture,
            climatology_source: SourceSetting::Fixture,
            geo_source: SourceSetting::Fixture,
            fixture_dir: None,
            forecast_fixture: "forecast.json".into(),
            climatology_fixture: "climatology.json".into(),
            geo_fixture: "geo.json".into(),
            forecast_units: UnitSystem::Metric,
            forecast_endpoint: "https://api.openweathermap.org/data/2.5/onecall".into(),
            climatology_endpoint: "https://meteostat.p.rapidapi.com/point/normals".into(),
            geo_endpoint: "https://nominatim.openstreetmap.org/reverse".into(),
            provider: ProviderSetting::Mock,
            model: "wx-mock-1".into(),
            provider_base_url: "https://api.openai.com/v1".into(),
            mock_scripts_dir: None,
            prefs: UserPrefs::default(),
            out_dir: PathBuf::from("out"),
            pdf_command: None,
            clock_utc: None,
            token_budget: 24_000,
            front_params: FrontDetectionParams::default(),
            hazard_params: HazardParams::default(),
            prompt_config: PromptConfig::default(),
            debug_prompts: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| ConfigError(format!("invalid value for `{key}`: {e}")))
}

fn parse_clock(value: &str) -> Result<i64, ConfigError> {
    if let Ok(epoch) = value.parse::<i64>() {
        return Ok(epoch);
    }
    chrono::DateTime::parse_from_rfc3339(value)
        .map(|dt| dt.timestamp())
        .map_err(|e| ConfigError(format!("invalid value for `clock_utc`: {e}")))
}

impl PipelineConfig {
    /// Parses a config file. Unknown keys are errors so typos surface
    /// before any I/O happens.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut config = PipelineConfig::default();
        for (lineno, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                )));
            };
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Applies one key/value setting; shared by file parsing and flag
    /// overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "location_name" => self.location.name = value.to_string(),
            "latitude" => self.location.latitude = parse(key, value)?,
            "longitude" => self.location.longitude = parse(key, value)?,
            "utc_offset_seconds" => self.location.utc_offset_seconds = parse(key, value)?,
            "horizon_hours" => self.horizon_hours = parse(key, value)?,
            "forecast_source" => self.forecast_source = parse(key, value)?,
            "climatology_source" => self.climatology_source = parse(key, value)?,
            "geo_source" => self.geo_source = parse(key, value)?,
            "fixture_dir" => self.fixture_dir = Some(PathBuf::from(value)),
            "forecast_fixture" => self.forecast_fixture = value.to_string(),
            "climatology_fixture" => self.climatology_fixture = value.to_string(),
            "geo_fixture" => self.geo_fixture = value.to_string(),
            "forecast_units" => self.forecast_units = parse(key, value)?,
            "forecast_endpoint" => self.forecast_endpoint = value.to_string(),
            "climatology_endpoint" => self.climatology_endpoint = value.to_string(),
            "geo_endpoint" => self.geo_endpoint = value.to_string(),
            "provider" => self.provider = parse(key, value)?,
            "model" => self.model = value.to_string(),
            "provider_base_url" => self.provider_base_url = value.to_string(),
            "mock_scripts_dir" => self.mock_scripts_dir = Some(PathBuf::from(value)),
            "tone" => self.prefs.tone = parse::<Tone>(key, value)?,
            "audience" => self.prefs.audience = parse::<Audience>(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "pdf_command" => self.pdf_command = Some(value.to_string()),
            "clock_utc" => self.clock_utc = Some(parse_clock(value)?),
            "token_budget" => self.token_budget = parse(key, value)?,
            "retries" => self.prompt_config.max_repair_retries = parse(key, value)?,
            "temperature" => self.prompt_config.temperature = parse(key, value)?,
            "illustrator_temperature" => {
                self.prompt_config.illustrator_temperature = parse(key, value)?
            }
            "max_output_tokens" => self.prompt_config.max_output_tokens = parse(key, value)?,
            "front_window_h" => self.front_params.window_hours = parse(key, value)?,
            "front_pressure_thresh" => {
                self.front_params.pressure_tendency_threshold = parse(key, value)?
            }
            "front_veer_thresh" => self.front_params.veer_threshold_deg = parse(key, value)?,
            "front_temp_drop" => self.front_params.temp_drop_threshold = parse(key, value)?,
            "front_drop_window_h" => self.front_params.temp_drop_window_hours = parse(key, value)?,
            "heavy_precip_mmh" => self.hazard_params.heavy_precip_rate = parse(key, value)?,
            "flood_sum_mm" => self.hazard_params.flood_sum = parse(key, value)?,
            "flood_window_h" => self.hazard_params.flood_window_hours = parse(key, value)?,
            "high_wind_ms" => self.hazard_params.high_wind_sustained = parse(key, value)?,
            "high_gust_ms" => self.hazard_params.high_wind_gust = parse(key, value)?,
            "heat_offset_c" => self.hazard_params.heat_offset = parse(key, value)?,
            "cold_offset_c" => self.hazard_params.cold_offset = parse(key, value)?,
            "low_visibility_m" => self.hazard_params.low_visibility = parse(key, value)?,
            other => return Err(ConfigError(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Forces every source to fixture mode and the provider to mock.
    pub fn set_offline(&mut self) {
        self.forecast_source = SourceSetting::Fixture;
        self.climatology_source = SourceSetting::Fixture;
        self.geo_source = SourceSetting::Fixture;
        self.provider = ProviderSetting::Mock;
    }

    /// Checks the cross-field invariants before any I/O. The fixture
    /// directory may come from `METEO_FIXTURE_DIR` when the config omits
    /// it; live providers need `LLM_API_KEY`.
    pub fn validate(&mut self) -> Result<(), ConfigError> {
        if !(1..=120).contains(&self.horizon_hours) {
            return Err(ConfigError(format!(
                "horizon_hours {} outside [1, 120]",
                self.horizon_hours
            )));
        }
        let any_fixture = [
            self.forecast_source,
            self.climatology_source,
            self.geo_source,
        ]
        .contains(&SourceSetting::Fixture);
        if any_fixture && self.fixture_dir.is_none() {
            if let Ok(dir) = std::env::var("METEO_FIXTURE_DIR") {
                self.fixture_dir = Some(PathBuf::from(dir));
            } else {
                return Err(ConfigError(
                    "fixture mode requires fixture_dir (or METEO_FIXTURE_DIR)".into(),
                ));
            }
        }
        if self.provider == ProviderSetting::Live && std::env::var("LLM_API_KEY").is_err() {
            return Err(ConfigError("live provider requires LLM_API_KEY".into()));
        }
        self.location
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        Ok(())
    }

    fn fixture_path(&self, file: &str) -> PathBuf {
        self.fixture_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("."))
            .join(file)
    }

    pub fn forecast_source_config(&self) -> DataSourceConfig {
        match self.forecast_source {
            SourceSetting::Fixture => DataSourceConfig {
                mode: SourceMode::Fixture {
                    path: self.fixture_path(&self.forecast_fixture),
                },
                units: self.forecast_units,
            },
            SourceSetting::Live => DataSourceConfig {
                mode: SourceMode::Live {
                    endpoint: self.forecast_endpoint.clone(),
                    api_key: std::env::var("OPENWEATHER_API_KEY").ok(),
                    retry: 1,
                },
                units: self.forecast_units,
            },
        }
    }

    pub fn climatology_source_config(&self) -> DataSourceConfig {
        match self.climatology_source {
            SourceSetting::Fixture => {
                DataSourceConfig::fixture(self.fixture_path(&self.climatology_fixture))
            }
            SourceSetting::Live => DataSourceConfig {
                mode: SourceMode::Live {
                    endpoint: self.climatology_endpoint.clone(),
                    api_key: std::env::var("METEOSTAT_API_KEY").ok(),
                    retry: 1,
                },
                units: UnitSystem::Metric,
            },
        }
    }

    pub fn geo_source_config(&self) -> DataSourceConfig {
        match self.geo_source {
            SourceSetting::Fixture => {
                DataSourceConfig::fixture(self.fixture_path(&self.geo_fixture))
            }
            SourceSetting::Live => DataSourceConfig {
                mode: SourceMode::Live {
                    endpoint: self.geo_endpoint.clone(),
                    api_key: None,
                    retry: 1,
                },
                units: UnitSystem::Metric,
            },
        }
    }
}
