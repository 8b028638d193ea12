//! Prompt templates and assembly. The system templates ship as versioned
//! text files; user prompts are assembled deterministically from the
//! pipeline's domain objects so identical inputs produce identical
//! prompts (and therefore identical mock-script hashes).

use crate::context::{format_utc, ExternalInfoBlock};
use crate::ingest::{ForecastSeries, GeoContext, PARAMETER_NAMES};

use super::validate::MeteorologistOutput;

pub const METEOROLOGIST_SYSTEM: &str = include_str!("../../templates/meteorologist_system.txt");
pub const WRITER_SYSTEM: &str = include_str!("../../templates/writer_system.txt");
pub const ILLUSTRATOR_SYSTEM: &str = include_str!("../../templates/illustrator_system.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tone {
    #[default]
    Neutral,
    Technical,
    Casual,
}

impl std::str::FromStr for Tone {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "neutral" => Ok(Tone::Neutral),
            "technical" => Ok(Tone::Technical),
            "casual" => Ok(Tone::Casual),
            other => Err(format!(
                "unknown tone `{other}` (neutral, technical, casual)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Audience {
    #[default]
    General,
    Expert,
}

impl std::str::FromStr for Audience {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Audience::General),
            "expert" => Ok(Audience::Expert),
            other => Err(format!("unknown audience `{other}` (general, expert)")),
        }
    }
}

/// User preferences the writer honors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UserPrefs {
    pub tone: Tone,
    pub audience: Audience,
}

pub fn tone_directive(tone: Tone) -> &'static str {
    match tone {
        Tone::Neutral => "Write in a neutral, factual tone suitable for a public weather bulletin.",
        Tone::Technical => {
            "Use precise technical meteorological terminology; assume a professionally trained audience."
        }
        Tone::Casual => "Write in a relaxed, conversational tone while staying factually precise.",
    }
}

pub fn audience_directive(audience: Audience) -> &'static str {
    match audience {
        Audience::General => "Address a general audience with no meteorological background.",
        Audience::Expert => "Address readers comfortable with meteorological concepts and units.",
    }
}

pub fn meteorologist_user_prompt(block: &ExternalInfoBlock) -> String {
    format!(
        "Interpret the following EXTERNAL INFO block and produce your structured analysis.\n\n{}",
        block.rendered_text
    )
}

pub fn writer_user_prompt(
    met: &MeteorologistOutput,
    geo: &GeoContext,
    prefs: &UserPrefs,
) -> String {
    let warnings = if met.warnings.is_empty() {
        "- none".to_string()
    } else {
        met.warnings
            .iter()
            .map(|w| format!("- {w}"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    format!(
        "LOCATION CONTEXT\nplace: {place}\nregion: {region}\nterrain: {terrain}\n\n\
         METEOROLOGIST SUMMARY\n{summary}\n\n\
         SUPPORTING EVIDENCE\n{explanation}\n\n\
         WARNINGS\n{warnings}\n\n\
         DIRECTIVES\n{tone}\n{audience}",
        place = geo.place_name,
        region = geo.region_kind,
        terrain = geo.terrain_kind,
        summary = met.summary,
        explanation = met.explanation,
        tone = tone_directive(prefs.tone),
        audience = audience_directive(prefs.audience),
    )
}

pub fn illustrator_user_prompt(series: &ForecastSeries, met: &MeteorologistOutput) -> String {
    let available: Vec<&str> = PARAMETER_NAMES
        .iter()
        .copied()
        .filter(|name| series.samples.iter().all(|s| s.parameter(name).is_some()))
        .collect();
    format!(
        "SERIES\nstart: {start}\nend: {end}\nhours: {hours}\n\
         parameters fully available: {params}\n\n\
         NARRATIVE SUMMARY\n{summary}",
        start = format_utc(series.start_timestamp()),
        end = format_utc(series.end_timestamp()),
        hours = series.samples.len(),
        params = available.join(", "),
        summary = met.summary,
    )
}
