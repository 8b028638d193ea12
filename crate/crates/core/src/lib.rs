//! End-to-end weather report generation: hourly forecast ingestion,
//! deterministic meteorological diagnostics, structured-output LLM agents,
//! SVG chart rendering, and report compilation.
//!
//! The pipeline stages are independent modules wired together by
//! [`pipeline`]:
//!
//! 1. [`ingest`]: fetch and validate forecasts, climatological normals,
//!    and geographic context (live HTTP or recorded fixtures).
//! 2. [`diagnostics`]: pressure tendencies, wind rotation, cold-front
//!    detection, climatological anomaly scoring, hazard flagging.
//! 3. [`context`]: serialize everything into the prompt-ready
//!    EXTERNAL INFO block.
//! 4. [`agents`]: meteorologist / writer / illustrator roles over a
//!    provider-agnostic chat interface with schema validation and retries.
//! 5. [`chart`]: deterministic SVG rendering of validated chart specs.
//! 6. [`report`]: compile all content blocks and emit Markdown / HTML.
//!
//! Everything downstream of ingestion is pure: with fixture inputs, the
//! mock provider, and an injected clock, a full pipeline run is
//! byte-for-byte reproducible.

pub mod agents;
pub mod chart;
pub mod config;
pub mod context;
pub mod diagnostics;
pub mod ingest;
pub mod pipeline;
pub mod report;

pub use config::PipelineConfig;
pub use ingest::{ClimatologyNormals, ForecastSeries, GeoContext, HourlySample, LocationRef};
