//! Deterministic meteorological feature extraction: pressure tendencies,
//! wind rotation, cold-front detection, climatological anomaly scoring,
//! and hazard flagging. All operations are pure functions over immutable
//! inputs.

mod anomaly;
mod circular;
mod fronts;
mod hazards;

pub use anomaly::{
    anomaly_score, monthly_blend, normal_cdf, spanned_months, AnomalyParameter, AnomalyReport,
    AnomalySeverity, MonthSpan, MonthlyBlend,
};
pub use circular::{circular_diff, wind_veer};
pub use fronts::{detect_fronts, pressure_tendency, FrontDetectionParams, FrontEvent, FrontKind};
pub use hazards::{
    detect_hazards, HazardKind, HazardParams, HazardSeverity, HazardWarning, TriggeringValue,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("series too short: {required} samples required, {actual} present")]
    SeriesTooShort { required: usize, actual: usize },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("non-positive threshold: {0}")]
    NonPositiveThreshold(&'static str),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("missing normals for month {0}")]
    MissingMonth(u32),
}
