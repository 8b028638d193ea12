//! Python bindings for the weather report pipeline.
//!
//! The main domain types (forecast series, climatological normals, geo
//! context, the external-info block) are exposed as classes; diagnostic
//! findings and agent outputs cross the boundary as plain dicts so Python
//! code can treat them as data.

// #[pymethods]-generated argument conversions trip this lint.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use wxreport::agents::{
    default_chart_specs, validate_meteorologist, validate_writer, ChartKind, ChartSpec,
};
use wxreport::chart::render_chart as core_render_chart;
use wxreport::config::PipelineConfig;
use wxreport::context::{
    build_external_info as core_build_external_info, estimate_tokens as core_estimate_tokens,
};
use wxreport::diagnostics::{
    anomaly_score as core_anomaly_score, circular_diff as core_circular_diff,
    detect_fronts as core_detect_fronts, detect_hazards as core_detect_hazards,
    pressure_tendency as core_pressure_tendency, wind_veer as core_wind_veer, AnomalyParameter,
    FrontDetectionParams, HazardParams,
};
use wxreport::ingest::{
    parse_climatology, parse_forecast, parse_geo_context, LocationRef, UnitSystem, PARAMETER_NAMES,
};
use wxreport::pipeline::{run_report as core_run_report, write_report_bundle};

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts any serde-serializable value into Python dicts/lists/scalars.
fn to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<PyObject> {
    Ok(match value {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_py(py),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py(py)
            }
        }
        serde_json::Value::String(s) => s.into_py(py),
        serde_json::Value::Array(items) => {
            let list = PyList::empty_bound(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_py(py)
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new_bound(py);
            for (key, item) in map {
                dict.set_item(key, to_py(py, item)?)?;
            }
            dict.into_py(py)
        }
    })
}

fn serialize_to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<PyObject> {
    let json = serde_json::to_value(value).map_err(value_error)?;
    to_py(py, &json)
}

/// An hourly multi-parameter forecast time series.
#[pyclass(name = "ForecastSeries")]
#[derive(Clone)]
struct PyForecastSeries {
    inner: wxreport::ForecastSeries,
}

#[pymethods]
impl PyForecastSeries {
    /// Parses a One Call 2.5 JSON payload, normalizing units
    /// (`units` is the payload's system: "standard", "metric", "imperial").
    #[staticmethod]
    #[pyo3(signature = (payload, units="metric", name="", latitude=0.0, longitude=0.0))]
    fn parse(
        payload: &str,
        units: &str,
        name: &str,
        latitude: f64,
        longitude: f64,
    ) -> PyResult<Self> {
        let units: UnitSystem = units.parse().map_err(value_error)?;
        let location = LocationRef {
            name: name.to_string(),
            latitude,
            longitude,
            utc_offset_seconds: 0,
        };
        let inner = parse_forecast(payload.as_bytes(), units, &location).map_err(value_error)?;
        Ok(PyForecastSeries { inner })
    }

    #[getter]
    fn location_name(&self) -> String {
        self.inner.location.name.clone()
    }

    #[getter]
    fn latitude(&self) -> f64 {
        self.inner.location.latitude
    }

    #[getter]
    fn longitude(&self) -> f64 {
        self.inner.location.longitude
    }

    #[getter]
    fn utc_offset_seconds(&self) -> i32 {
        self.inner.location.utc_offset_seconds
    }

    #[getter]
    fn horizon_hours(&self) -> u32 {
        self.inner.horizon_hours
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "ForecastSeries(location='{}', samples={}, start={})",
            self.inner.location.name,
            self.inner.samples.len(),
            self.inner.start_timestamp(),
        )
    }

    /// All samples as a list of dicts.
    fn samples(&self, py: Python<'_>) -> PyResult<PyObject> {
        serialize_to_py(py, &self.inner.samples)
    }

    /// Values of one named parameter, `None` where absent.
    fn parameter_values(&self, name: &str) -> PyResult<Vec<Option<f64>>> {
        if !PARAMETER_NAMES.contains(&name) {
            return Err(PyValueError::new_err(format!("unknown parameter `{name}`")));
        }
        Ok(self
            .inner
            .samples
            .iter()
            .map(|s| s.parameter(name))
            .collect())
    }

    fn truncate(&self, horizon_hours: u32) -> Self {
        PyForecastSeries {
            inner: self.inner.clone().truncate(horizon_hours),
        }
    }
}

/// Twelve monthly climatological normals.
#[pyclass(name = "ClimatologyNormals")]
#[derive(Clone)]
struct PyClimatologyNormals {
    inner: wxreport::ClimatologyNormals,
}

#[pymethods]
impl PyClimatologyNormals {
    /// Parses a monthly-normals JSON payload (per-month `tavg`, `prcp`).
    #[staticmethod]
    fn parse(payload: &str) -> PyResult<Self> {
        let inner = parse_climatology(payload.as_bytes()).map_err(value_error)?;
        Ok(PyClimatologyNormals { inner })
    }

    #[getter]
    fn baseline_years(&self) -> u32 {
        self.inner.baseline_years()
    }

    /// The normal for one calendar month (1–12) as a dict.
    fn month(&self, py: Python<'_>, month: u32) -> PyResult<PyObject> {
        let normal = self
            .inner
            .month(month)
            .ok_or_else(|| PyValueError::new_err(format!("month {month} out of range")))?;
        serialize_to_py(py, normal)
    }

    fn months(&self, py: Python<'_>) -> PyResult<PyObject> {
        serialize_to_py(py, &self.inner.months())
    }

    fn __repr__(&self) -> String {
        format!(
            "ClimatologyNormals(baseline_years={})",
            self.inner.baseline_years()
        )
    }
}

/// Geographic metadata with region/terrain classification.
#[pyclass(name = "GeoContext")]
#[derive(Clone)]
struct PyGeoContext {
    inner: wxreport::GeoContext,
}

#[pymethods]
impl PyGeoContext {
    /// Parses a reverse-geocode JSON payload and applies the tag mapping.
    #[staticmethod]
    #[pyo3(signature = (payload, name="", latitude=0.0, longitude=0.0))]
    fn parse(payload: &str, name: &str, latitude: f64, longitude: f64) -> PyResult<Self> {
        let location = LocationRef {
            name: name.to_string(),
            latitude,
            longitude,
            utc_offset_seconds: 0,
        };
        let inner = parse_geo_context(payload.as_bytes(), &location).map_err(value_error)?;
        Ok(PyGeoContext { inner })
    }

    #[getter]
    fn place_name(&self) -> String {
        self.inner.place_name.clone()
    }

    #[getter]
    fn region_kind(&self) -> String {
        self.inner.region_kind.to_string()
    }

    #[getter]
    fn terrain_kind(&self) -> String {
        self.inner.terrain_kind.to_string()
    }

    #[getter]
    fn elevation(&self) -> Option<f64> {
        self.inner.elevation
    }

    fn __repr__(&self) -> String {
        format!(
            "GeoContext(place='{}', region={}, terrain={})",
            self.inner.place_name, self.inner.region_kind, self.inner.terrain_kind,
        )
    }
}

/// The serialized prompt-context bundle.
#[pyclass(name = "ExternalInfoBlock")]
struct PyExternalInfoBlock {
    rendered_text: String,
    token_estimate: usize,
    sections: Vec<(String, String)>,
}

#[pymethods]
impl PyExternalInfoBlock {
    #[getter]
    fn rendered_text(&self) -> String {
        self.rendered_text.clone()
    }

    #[getter]
    fn token_estimate(&self) -> usize {
        self.token_estimate
    }

    /// Section (name, payload) pairs in their fixed order.
    fn sections(&self) -> Vec<(String, String)> {
        self.sections.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "ExternalInfoBlock(sections={}, token_estimate={})",
            self.sections.len(),
            self.token_estimate,
        )
    }
}

/// Signed angular difference `to_deg - from_deg` wrapped into (−180, +180].
#[pyfunction]
fn circular_diff(from_deg: f64, to_deg: f64) -> PyResult<f64> {
    core_circular_diff(from_deg, to_deg).map_err(value_error)
}

/// Backward finite-difference pressure tendency (hPa/h); the first
/// `window_h` entries are None.
#[pyfunction]
fn pressure_tendency(series: &PyForecastSeries, window_h: usize) -> PyResult<Vec<Option<f64>>> {
    core_pressure_tendency(&series.inner, window_h).map_err(value_error)
}

/// Accumulated signed wind rotation across `[start_ts, end_ts]`.
#[pyfunction]
fn wind_veer(series: &PyForecastSeries, start_ts: i64, end_ts: i64) -> PyResult<f64> {
    core_wind_veer(&series.inner, start_ts, end_ts).map_err(value_error)
}

/// Deterministic token estimate (chars / 4, rounded up).
#[pyfunction]
fn estimate_tokens(text: &str) -> usize {
    core_estimate_tokens(text)
}

/// Cold-front detection; returns a list of event dicts.
#[pyfunction]
#[pyo3(signature = (series, window_hours=6, pressure_tendency_threshold=1.0,
                    veer_threshold_deg=45.0, temp_drop_threshold=4.0, temp_drop_window_hours=3))]
fn detect_fronts(
    py: Python<'_>,
    series: &PyForecastSeries,
    window_hours: usize,
    pressure_tendency_threshold: f64,
    veer_threshold_deg: f64,
    temp_drop_threshold: f64,
    temp_drop_window_hours: usize,
) -> PyResult<PyObject> {
    let params = FrontDetectionParams {
        window_hours,
        pressure_tendency_threshold,
        veer_threshold_deg,
        temp_drop_threshold,
        temp_drop_window_hours,
    };
    let events = core_detect_fronts(&series.inner, &params).map_err(value_error)?;
    serialize_to_py(py, &events)
}

/// Climatological anomaly for "temperature" or "precipitation".
#[pyfunction]
fn anomaly_score(
    py: Python<'_>,
    series: &PyForecastSeries,
    normals: &PyClimatologyNormals,
    parameter: &str,
) -> PyResult<PyObject> {
    let parameter: AnomalyParameter = parameter.parse().map_err(value_error)?;
    let report =
        core_anomaly_score(&series.inner, &normals.inner, parameter).map_err(value_error)?;
    serialize_to_py(py, &report)
}

/// Threshold-based hazards; the temperature and precipitation anomalies
/// are computed internally from the normals.
#[pyfunction]
fn detect_hazards(
    py: Python<'_>,
    series: &PyForecastSeries,
    normals: &PyClimatologyNormals,
) -> PyResult<PyObject> {
    let anomalies = vec![
        core_anomaly_score(&series.inner, &normals.inner, AnomalyParameter::Temperature)
            .map_err(value_error)?,
        core_anomaly_score(
            &series.inner,
            &normals.inner,
            AnomalyParameter::Precipitation,
        )
        .map_err(value_error)?,
    ];
    let hazards = core_detect_hazards(&series.inner, &anomalies, &HazardParams::default())
        .map_err(value_error)?;
    serialize_to_py(py, &hazards)
}

/// Builds the EXTERNAL INFO block, running default-threshold diagnostics
/// over the inputs first.
#[pyfunction]
fn build_external_info(
    series: &PyForecastSeries,
    normals: &PyClimatologyNormals,
    geo: &PyGeoContext,
) -> PyResult<PyExternalInfoBlock> {
    let fronts = if series.inner.samples.len() >= 12 {
        core_detect_fronts(&series.inner, &FrontDetectionParams::default()).map_err(value_error)?
    } else {
        Vec::new()
    };
    let anomalies = vec![
        core_anomaly_score(&series.inner, &normals.inner, AnomalyParameter::Temperature)
            .map_err(value_error)?,
        core_anomaly_score(
            &series.inner,
            &normals.inner,
            AnomalyParameter::Precipitation,
        )
        .map_err(value_error)?,
    ];
    let hazards = core_detect_hazards(&series.inner, &anomalies, &HazardParams::default())
        .map_err(value_error)?;
    let block = core_build_external_info(
        &series.inner,
        &normals.inner,
        &geo.inner,
        &fronts,
        &anomalies,
        &hazards,
    )
    .map_err(value_error)?;
    Ok(PyExternalInfoBlock {
        rendered_text: block.rendered_text,
        token_estimate: block.token_estimate,
        sections: block
            .sections
            .iter()
            .map(|s| (s.name.to_string(), s.payload.clone()))
            .collect(),
    })
}

/// Renders a line chart of 1–3 parameters into a standalone SVG string.
#[pyfunction]
#[pyo3(signature = (series, parameters, title="", y_axis_label="", highlight_ranges=None))]
fn render_chart(
    series: &PyForecastSeries,
    parameters: Vec<String>,
    title: &str,
    y_axis_label: &str,
    highlight_ranges: Option<Vec<(i64, i64)>>,
) -> PyResult<String> {
    let spec = ChartSpec {
        kind: ChartKind::Line,
        title: title.to_string(),
        parameters,
        y_axis_label: y_axis_label.to_string(),
        highlight_ranges: highlight_ranges.unwrap_or_default(),
    };
    let chart = core_render_chart(&spec, &series.inner).map_err(value_error)?;
    Ok(chart.svg_text)
}

/// Renders the default chart set (temperature, wind, precipitation).
#[pyfunction]
fn render_default_charts(series: &PyForecastSeries) -> PyResult<Vec<String>> {
    default_chart_specs()
        .iter()
        .map(|spec| {
            core_render_chart(spec, &series.inner)
                .map(|chart| chart.svg_text)
                .map_err(value_error)
        })
        .collect()
}

/// Validates raw agent output against the named schema
/// ("meteorologist" or "writer") and returns the parsed dict.
#[pyfunction]
fn validate_agent_output(py: Python<'_>, raw: &str, schema: &str) -> PyResult<PyObject> {
    match schema {
        "meteorologist" => {
            let parsed = validate_meteorologist(raw).map_err(value_error)?;
            serialize_to_py(py, &parsed)
        }
        "writer" => {
            let parsed = validate_writer(raw, &PARAMETER_NAMES).map_err(value_error)?;
            serialize_to_py(py, &parsed)
        }
        other => Err(PyValueError::new_err(format!(
            "unknown schema `{other}` (meteorologist, writer)"
        ))),
    }
}

/// Runs the full offline pipeline from a config file and writes the
/// report bundle; returns the written paths.
#[pyfunction]
#[pyo3(signature = (config_path, out_dir=None, offline=true))]
fn run_report(config_path: &str, out_dir: Option<&str>, offline: bool) -> PyResult<Vec<String>> {
    let mut config = PipelineConfig::from_file(config_path).map_err(value_error)?;
    if let Some(dir) = out_dir {
        config.out_dir = dir.into();
    }
    if offline {
        config.set_offline();
    }
    config.validate().map_err(value_error)?;
    let outcome = core_run_report(&config).map_err(|e| PyIOError::new_err(e.to_string()))?;
    let written =
        write_report_bundle(&outcome, &config).map_err(|e| PyIOError::new_err(e.to_string()))?;
    Ok(written.iter().map(|p| p.display().to_string()).collect())
}

#[pymodule]
fn wxreport_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyForecastSeries>()?;
    m.add_class::<PyClimatologyNormals>()?;
    m.add_class::<PyGeoContext>()?;
    m.add_class::<PyExternalInfoBlock>()?;
    m.add_function(wrap_pyfunction!(circular_diff, m)?)?;
    m.add_function(wrap_pyfunction!(pressure_tendency, m)?)?;
    m.add_function(wrap_pyfunction!(wind_veer, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_tokens, m)?)?;
    m.add_function(wrap_pyfunction!(detect_fronts, m)?)?;
    m.add_function(wrap_pyfunction!(anomaly_score, m)?)?;
    m.add_function(wrap_pyfunction!(detect_hazards, m)?)?;
    m.add_function(wrap_pyfunction!(build_external_info, m)?)?;
    m.add_function(wrap_pyfunction!(render_chart, m)?)?;
    m.add_function(wrap_pyfunction!(render_default_charts, m)?)?;
    m.add_function(wrap_pyfunction!(validate_agent_output, m)?)?;
    m.add_function(wrap_pyfunction!(run_report, m)?)?;
    m.add("PARAMETER_NAMES", PARAMETER_NAMES.to_vec())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_symbols_resolve() {
        // The binding layer is a thin veneer; this sanity-checks that the
        // pure helpers behave without needing a Python interpreter.
        assert_eq!(core_estimate_tokens("12345678"), 2);
        assert!(core_circular_diff(350.0, 10.0).unwrap() == 20.0);
    }
}
