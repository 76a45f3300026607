use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{EvidenceSource, ObservationKind, SourceError};
use crate::pattern::{render_phrases, Dialect};

fn default_timeout_ms() -> u64 {
    10_000
}

/// Template-driven hit-count connector configuration.
///
/// `url_template` may contain `{query}` (URL-encoded rendered query) and
/// `{year}` (the year filter, empty when absent). `count_path` locates the
/// count in the JSON response: dot-separated object keys and array indices
/// (`data.total`, `results.0.count`) or a JSON pointer (`/data/total`). An
/// empty path means the whole body is the count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    pub engine_id: String,
    pub url_template: String,
    pub count_path: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Off unless explicitly switched on.
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub dialect: Dialect,
    /// The signal this endpoint reports.
    #[serde(default = "default_kind")]
    pub kind: ObservationKind,
    #[serde(default, rename = "type", skip_serializing)]
    _type: Option<String>,
}

fn default_kind() -> ObservationKind {
    ObservationKind::Hits
}

#[derive(Debug, Clone)]
pub struct RemoteSource {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteSource {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .build()
            .into();
        RemoteSource { config, agent }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    pub fn url_for(&self, phrases: &[&str], year: Option<i32>) -> String {
        let query = render_phrases(phrases, self.config.dialect);
        let encoded: String = form_urlencoded::byte_serialize(query.as_bytes()).collect();
        self.config
            .url_template
            .replace("{query}", &encoded)
            .replace("{year}", &year.map(|y| y.to_string()).unwrap_or_default())
    }

    fn error(&self, detail: impl Into<String>) -> SourceError {
        SourceError::Unparseable {
            engine_id: self.config.engine_id.clone(),
            detail: detail.into(),
        }
    }
}

impl EvidenceSource for RemoteSource {
    fn engine_id(&self) -> &str {
        &self.config.engine_id
    }

    fn fingerprint(&self) -> String {
        let material = serde_json::to_vec(&self.config).expect("config serializes");
        hex::encode(Sha256::digest(&material))
    }

    fn count(
        &self,
        phrases: &[&str],
        kind: ObservationKind,
        year: Option<i32>,
    ) -> Result<u64, SourceError> {
        let engine_id = self.config.engine_id.clone();
        if !self.config.enabled {
            return Err(SourceError::Disabled { engine_id });
        }
        if kind != self.config.kind {
            return Err(SourceError::Unsupported {
                engine_id,
                what: format!("{kind} measurement"),
            });
        }
        let url = self.url_for(phrases, year);
        let body = self
            .agent
            .get(&url)
            .call()
            .and_then(|mut response| response.body_mut().read_to_string())
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => SourceError::Timeout {
                    engine_id: engine_id.clone(),
                },
                other => SourceError::Transport {
                    engine_id: engine_id.clone(),
                    detail: other.to_string(),
                },
            })?;
        let json: Value = serde_json::from_str(&body).map_err(|e| self.error(e.to_string()))?;
        let node = extract_path(&json, &self.config.count_path)
            .ok_or_else(|| self.error(format!("no value at `{}`", self.config.count_path)))?;
        parse_count(node).ok_or_else(|| self.error(format!("not a count: {node}")))
    }
}

pub(crate) fn extract_path<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    if path.starts_with('/') {
        return value.pointer(path);
    }
    path.split('.')
        .filter(|s| !s.is_empty())
        .try_fold(value, |node, segment| match node {
            Value::Object(map) => map.get(segment),
            Value::Array(items) => segment.parse::<usize>().ok().and_then(|i| items.get(i)),
            _ => None,
        })
}

/// Non-negative integers, integral floats, and numeric strings with digit
/// grouping (`"1,234"`, `"1 234"`).
pub(crate) fn parse_count(value: &Value) -> Option<u64> {
    match value {
        Value::Number(n) => n.as_u64().or_else(|| {
            n.as_f64()
                .filter(|f| f.is_finite() && *f >= 0.0 && f.fract() == 0.0 && *f < 2f64.powi(63))
                .map(|f| f as u64)
        }),
        Value::String(s) => {
            let digits: String = s
                .chars()
                .filter(|c| !matches!(c, ',' | ' ' | '_' | '\u{a0}'))
                .collect();
            digits.parse().ok()
        }
        _ => None,
    }
}
