//! Shared test support: canonical canned agent responses, a role-matching
//! mock used to (re)generate the hash-keyed mock scripts, and path
//! helpers.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use wxreport::agents::{
    prompt_hash, AgentError, ChatProvider, ChatRequest, ChatResponse, FinishReason, MockProvider,
    SCRIPT_SEPARATOR,
};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root")
}

pub fn canonical_config_path() -> PathBuf {
    repo_root().join("fixtures/configs/canonical.conf")
}

pub fn goldens_dir() -> PathBuf {
    repo_root().join("fixtures/goldens")
}

pub const MET_RESPONSE: &str = r#"{
  "summary": "The period opens with a mild, quiet early-summer day: light south-westerly winds, broken cloud, and afternoon temperatures near 22 °C under steady pressure around 1016 hPa. During the second morning an organized disturbance arrives from the west; pressure falls steadily, winds freshen and veer from south-west to north-west, and a band of heavy rain crosses the area around midday. Behind it the air mass turns markedly cooler, with daytime temperatures holding near 15 °C, easing winds, and rising pressure into the second evening.",
  "explanation": "The combination of a sustained pressure fall of one to two hectopascals per hour, a ninety-degree clockwise wind shift, and a six-degree temperature drop within three hours is the classic surface signature of a cold front. Maritime air behind the frontal boundary is displacing the warmer continental air mass that built up on the first day, and the heavy rain band at the wind shift marks the frontal convergence line itself. The monthly climatology makes the air mass change notable: the 48-hour mean runs more than one standard deviation below the June normal, while the rain delivered in six hours far exceeds what this coastal location typically records in the entire month.",
  "confidence_label": "high",
  "confidence_score": 0.82,
  "warnings": [
    "Heavy rainfall may cause localized flooding during the frontal passage, with most of the event total falling in only a few hours.",
    "Fresh south-westerly winds veer north-westerly with gusts near 20 m/s around the frontal passage."
  ]
}"#;

pub const WRITER_RESPONSE: &str = r#"{
  "title": "Cala Bruma 48-Hour Outlook: Temperature, Wind and Heavy Rain at a Passing Cold Front",
  "introduction": "A quiet early-summer day gives way to an active spell as a cold front crosses Cala Bruma during the second morning. Expect a warm first afternoon near 22 °C, then a sharp transition: pressure falls through the night, winds freshen and swing from south-west to north-west, and a short burst of very heavy rain arrives around midday. Conditions settle quickly behind the front, though the air stays unseasonably cool for June. Rainfall during the frontal passage is far above the monthly norm and may briefly overwhelm drainage in low-lying streets.",
  "weather_params": [
    {"name": "temperature", "description": "Near 22 °C at the first afternoon peak, falling about six degrees in three hours at the frontal passage and holding near 15 °C afterwards, well below the June normal."},
    {"name": "pressure", "description": "Steady around 1016 hPa before the front, falling one to two hectopascals per hour during its approach, then recovering to 1012 hPa behind it."},
    {"name": "wind_speed", "description": "Light to moderate south-westerlies initially, freshening to around 14 m/s with gusts near 20 m/s as the wind veers north-westerly at the front."},
    {"name": "precipitation", "description": "Dry until the frontal band arrives; roughly 46 mm falls in six hours, with peak rates near 12 mm/h, before clearing from the west."}
  ]
}"#;

pub const ILLUSTRATOR_RESPONSE: &str = r#"[
  {"kind": "line", "title": "Temperature with frontal passage highlighted", "parameters": ["temperature"], "y_axis_label": "Temperature (°C)", "highlight_ranges": [[1748836800, 1748876400]]},
  {"kind": "line", "title": "Wind speed and gusts", "parameters": ["wind_speed", "wind_gust"], "y_axis_label": "Wind (m/s)"},
  {"kind": "line", "title": "Hourly precipitation", "parameters": ["precipitation"], "y_axis_label": "Precipitation (mm/h)"}
]"#;

/// Meteorologist response missing the `warnings` key; used to script the
/// failing retry sequence.
pub const MET_RESPONSE_MISSING_WARNINGS: &str = r#"{
  "summary": "A cold front crosses during the second morning.",
  "explanation": "Falling pressure, veering winds and a sharp temperature drop mark the front.",
  "confidence_label": "high",
  "confidence_score": 0.82
}"#;

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Meteorologist,
    Writer,
    Illustrator,
}

/// A provider that answers by role (inferred from the system prompt) so
/// fixture scripts can be regenerated without knowing prompt hashes in
/// advance. Response sequences advance per call; the last entry repeats.
pub struct RoleMock {
    meteorologist: Vec<String>,
    writer: Vec<String>,
    illustrator: Vec<String>,
    cursors: Mutex<HashMap<u8, usize>>,
}

impl RoleMock {
    pub fn canonical() -> Self {
        RoleMock {
            meteorologist: vec![MET_RESPONSE.to_string()],
            writer: vec![WRITER_RESPONSE.to_string()],
            illustrator: vec![ILLUSTRATOR_RESPONSE.to_string()],
            cursors: Mutex::new(HashMap::new()),
        }
    }

    pub fn failing_meteorologist() -> Self {
        RoleMock {
            meteorologist: vec![MET_RESPONSE_MISSING_WARNINGS.to_string()],
            writer: vec![WRITER_RESPONSE.to_string()],
            illustrator: vec![ILLUSTRATOR_RESPONSE.to_string()],
            cursors: Mutex::new(HashMap::new()),
        }
    }

    fn role_of(system_prompt: &str) -> Role {
        if system_prompt.contains("professional meteorologist") {
            Role::Meteorologist
        } else if system_prompt.contains("official weather bulletin") {
            Role::Writer
        } else {
            Role::Illustrator
        }
    }
}

impl ChatProvider for RoleMock {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, AgentError> {
        request.validate()?;
        let (key, responses) = match Self::role_of(&request.system_prompt) {
            Role::Meteorologist => (0u8, &self.meteorologist),
            Role::Writer => (1, &self.writer),
            Role::Illustrator => (2, &self.illustrator),
        };
        let mut cursors = self.cursors.lock().unwrap();
        let cursor = cursors.entry(key).or_insert(0);
        let text = responses[(*cursor).min(responses.len() - 1)].clone();
        *cursor += 1;
        Ok(ChatResponse {
            text,
            finish_reason: FinishReason::Stop,
            prompt_tokens: 0,
            completion_tokens: 0,
        })
    }

    fn model_id(&self) -> String {
        "mock:wx-mock-1".to_string()
    }
}

/// Wraps a provider and records every (prompt hash, response) pair in
/// call order, for dumping as hash-keyed script files.
pub struct RecordingProvider<'a> {
    inner: &'a dyn ChatProvider,
    log: Mutex<Vec<(u64, String)>>,
}

impl<'a> RecordingProvider<'a> {
    pub fn new(inner: &'a dyn ChatProvider) -> Self {
        RecordingProvider {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    /// Writes one `<hash>.txt` script per distinct prompt, responses in
    /// call order. Consecutive identical responses collapse to one entry,
    /// which is behavior-preserving because an exhausted sequence repeats
    /// its last response.
    pub fn dump_scripts(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let log = self.log.lock().unwrap();
        let mut grouped: Vec<(u64, Vec<&str>)> = Vec::new();
        for (hash, response) in log.iter() {
            match grouped.iter_mut().find(|(h, _)| h == hash) {
                Some((_, seq)) => {
                    if seq.last() != Some(&response.as_str()) {
                        seq.push(response);
                    }
                }
                None => grouped.push((*hash, vec![response])),
            }
        }
        for (hash, responses) in grouped {
            let joined = responses.join(&format!("\n{SCRIPT_SEPARATOR}\n"));
            std::fs::write(
                dir.join(MockProvider::script_file_name(hash)),
                joined + "\n",
            )?;
        }
        Ok(())
    }
}

impl ChatProvider for RecordingProvider<'_> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, AgentError> {
        let response = self.inner.complete(request)?;
        self.log.lock().unwrap().push((
            prompt_hash(&request.system_prompt, &request.user_prompt),
            response.text.clone(),
        ));
        Ok(response)
    }

    fn model_id(&self) -> String {
        self.inner.model_id()
    }
}

/// Loads the canonical config with fixture paths rebased onto the
/// absolute repo root, so in-process tests need no working-directory
/// assumptions.
pub fn canonical_config() -> wxreport::PipelineConfig {
    let root = repo_root();
    let mut config = wxreport::PipelineConfig::from_file(canonical_config_path()).unwrap();
    config.fixture_dir = Some(root.join("fixtures/wire"));
    config.mock_scripts_dir = Some(root.join("fixtures/mock_scripts"));
    config
}

/// Compares (or rewrites, with UPDATE_GOLDENS=1) a golden file.
pub fn check_golden(path: &Path, actual: &str) {
    if std::env::var("UPDATE_GOLDENS").as_deref() == Ok("1") {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(path).unwrap_or_else(|e| {
        panic!(
            "missing golden {} ({e}); run with UPDATE_GOLDENS=1",
            path.display()
        )
    });
    assert_eq!(
        expected,
        actual,
        "output diverges from golden {}; rerun with UPDATE_GOLDENS=1 after reviewing",
        path.display()
    );
}
