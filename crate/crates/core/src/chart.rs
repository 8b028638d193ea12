//! Deterministic SVG rendering of validated chart specs.
//!
//! Hand-rolled emission (lines, text, rects, polylines) on a fixed
//! 800×400 canvas with fixed margins and a fixed palette: identical
//! (spec, series) inputs produce byte-identical documents, so goldens can
//! pin the exact output. No timestamps, random ids, or environment text
//! ever enter the SVG.

use thiserror::Error;

use crate::agents::ChartSpec;
use crate::context::format_utc;
use crate::ingest::{ForecastSeries, PARAMETER_NAMES};

pub const CANVAS_WIDTH: f64 = 800.0;
pub const CANVAS_HEIGHT: f64 = 400.0;
pub const MARGIN_LEFT: f64 = 60.0;
pub const MARGIN_RIGHT: f64 = 20.0;
pub const MARGIN_TOP: f64 = 40.0;
pub const MARGIN_BOTTOM: f64 = 50.0;

/// One stroke color per plotted parameter, in order.
pub const PALETTE: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

const HIGHLIGHT_FILL: &str = "#f4b942";
const AXIS_COLOR: &str = "#404040";
const GRID_COLOR: &str = "#d9d9d9";
const TEXT_COLOR: &str = "#202020";

#[derive(Debug, Error, PartialEq)]
pub enum ChartError {
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{parameter}` has no value at {}", format_utc(*timestamp))]
    MissingValue { parameter: String, timestamp: i64 },
}

/// A chart spec rendered against a series.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedChart {
    pub spec: ChartSpec,
    pub svg_text: String,
    pub width: u32,
    pub height: u32,
}

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// The affine time/value → pixel mapping used by the renderer; exposed so
/// fidelity checks can invert it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisTransform {
    pub t_start: i64,
    pub t_end: i64,
    pub y_min: f64,
    pub y_max: f64,
}

impl AxisTransform {
    pub fn x_pixel(&self, ts: i64) -> f64 {
        let span = (self.t_end - self.t_start) as f64;
        if span <= 0.0 {
            return MARGIN_LEFT;
        }
        MARGIN_LEFT
            + (ts - self.t_start) as f64 / span * (CANVAS_WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    pub fn y_pixel(&self, value: f64) -> f64 {
        let span = self.y_max - self.y_min;
        let plot_height = CANVAS_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        MARGIN_TOP + (1.0 - (value - self.y_min) / span) * plot_height
    }

    pub fn value_from_y_pixel(&self, y: f64) -> f64 {
        let plot_height = CANVAS_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        self.y_min + (1.0 - (y - MARGIN_TOP) / plot_height) * (self.y_max - self.y_min)
    }
}

/// Computes the y-axis bounds: plotted extent padded by 5% of its span on
/// each side, or ±1 unit around a constant level.
fn y_bounds(values: &[f64]) -> (f64, f64) {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    if span == 0.0 {
        (min - 1.0, max + 1.0)
    } else {
        (min - 0.05 * span, max + 0.05 * span)
    }
}

/// Derives the axis transform a render of (spec, series) will use.
pub fn axis_transform(
    spec: &ChartSpec,
    series: &ForecastSeries,
) -> Result<AxisTransform, ChartError> {
    let mut values = Vec::with_capacity(series.samples.len() * spec.parameters.len());
    for name in &spec.parameters {
        if !PARAMETER_NAMES.contains(&name.as_str()) {
            return Err(ChartError::UnknownParameter(name.clone()));
        }
        for sample in &series.samples {
            match sample.parameter(name) {
                Some(v) => values.push(v),
                None => {
                    return Err(ChartError::MissingValue {
                        parameter: name.clone(),
                        timestamp: sample.timestamp,
                    })
                }
            }
        }
    }
    let (y_min, y_max) = y_bounds(&values);
    Ok(AxisTransform {
        t_start: series.start_timestamp(),
        t_end: series.end_timestamp(),
        y_min,
        y_max,
    })
}

/// Renders a validated spec over the series into a standalone SVG
/// document: one polyline per parameter with one point per sample, hour
/// ticks every 12 h, and translucent bands for highlight ranges.
pub fn render_chart(
    spec: &ChartSpec,
    series: &ForecastSeries,
) -> Result<RenderedChart, ChartError> {
    let transform = axis_transform(spec, series)?;
    let plot_right = CANVAS_WIDTH - MARGIN_RIGHT;
    let plot_bottom = CANVAS_HEIGHT - MARGIN_BOTTOM;

    let mut svg = String::with_capacity(16 * 1024);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = CANVAS_WIDTH as u32,
        h = CANVAS_HEIGHT as u32,
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        CANVAS_WIDTH as u32, CANVAS_HEIGHT as u32
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24.00\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\" fill=\"{TEXT_COLOR}\">{}</text>\n",
        CANVAS_WIDTH / 2.0,
        escape_xml(&spec.title),
    ));

    // Highlight bands under everything else in the plot area.
    for (start, end) in &spec.highlight_ranges {
        let x0 = transform.x_pixel(*start);
        let x1 = transform.x_pixel(*end);
        svg.push_str(&format!(
            "<rect x=\"{x0:.2}\" y=\"{MARGIN_TOP:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{HIGHLIGHT_FILL}\" fill-opacity=\"0.25\"/>\n",
            (x1 - x0).max(0.0),
            plot_bottom - MARGIN_TOP,
        ));
    }

    // Horizontal grid and y tick labels: five evenly spaced levels.
    for i in 0..5 {
        let value = transform.y_min + (transform.y_max - transform.y_min) * f64::from(i) / 4.0;
        let y = transform.y_pixel(value);
        if i > 0 {
            svg.push_str(&format!(
                "<line x1=\"{MARGIN_LEFT:.2}\" y1=\"{y:.2}\" x2=\"{plot_right:.2}\" y2=\"{y:.2}\" stroke=\"{GRID_COLOR}\" stroke-width=\"1\"/>\n",
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{TEXT_COLOR}\">{value:.1}</text>\n",
            MARGIN_LEFT - 6.0,
            y + 4.0,
        ));
    }

    // Hour ticks every 12 h from the series start.
    let mut tick = transform.t_start;
    while tick <= transform.t_end {
        let x = transform.x_pixel(tick);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{plot_bottom:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{AXIS_COLOR}\" stroke-width=\"1\"/>\n",
            plot_bottom + 5.0,
        ));
        let label = chrono::DateTime::from_timestamp(tick, 0)
            .map(|dt| dt.format("%m-%d %H:%M").to_string())
            .unwrap_or_default();
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{TEXT_COLOR}\">{label}</text>\n",
            plot_bottom + 18.0,
        ));
        tick += 12 * 3600;
    }

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT:.2}\" y1=\"{MARGIN_TOP:.2}\" x2=\"{MARGIN_LEFT:.2}\" y2=\"{plot_bottom:.2}\" stroke=\"{AXIS_COLOR}\" stroke-width=\"1\"/>\n",
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT:.2}\" y1=\"{plot_bottom:.2}\" x2=\"{plot_right:.2}\" y2=\"{plot_bottom:.2}\" stroke=\"{AXIS_COLOR}\" stroke-width=\"1\"/>\n",
    ));

    // Y axis label, rotated.
    svg.push_str(&format!(
        "<text x=\"16.00\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{TEXT_COLOR}\" transform=\"rotate(-90 16.00 {:.2})\">{}</text>\n",
        (MARGIN_TOP + plot_bottom) / 2.0,
        (MARGIN_TOP + plot_bottom) / 2.0,
        escape_xml(&spec.y_axis_label),
    ));

    // One polyline per parameter, palette by position.
    for (idx, name) in spec.parameters.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut points = String::new();
        for (i, sample) in series.samples.iter().enumerate() {
            let value = sample.parameter(name).expect("checked by axis_transform");
            if i > 0 {
                points.push(' ');
            }
            points.push_str(&format!(
                "{:.2},{:.2}",
                transform.x_pixel(sample.timestamp),
                transform.y_pixel(value)
            ));
        }
        svg.push_str(&format!(
            "<polyline points=\"{points}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" stroke-linejoin=\"round\"/>\n",
        ));
    }

    // Legend only when several parameters share the canvas.
    if spec.parameters.len() > 1 {
        for (idx, name) in spec.parameters.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let y = MARGIN_TOP + 14.0 + 16.0 * idx as f64;
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                MARGIN_LEFT + 8.0,
                y - 4.0,
                MARGIN_LEFT + 28.0,
                y - 4.0,
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{TEXT_COLOR}\">{}</text>\n",
                MARGIN_LEFT + 34.0,
                escape_xml(name),
            ));
        }
    }

    svg.push_str("</svg>\n");
    Ok(RenderedChart {
        spec: spec.clone(),
        svg_text: svg,
        width: CANVAS_WIDTH as u32,
        height: CANVAS_HEIGHT as u32,
    })
}
