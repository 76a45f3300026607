//! Engine configuration files.
//!
//! The backend is chosen by an explicit `"type"` (`offline`, `recorded`,
//! `remote`) or, failing that, by the fields present: `corpus` selects the
//! offline backend, `hits` a recorded one, and `url_template` the remote
//! connector.

use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use super::{Corpus, CorpusError, EvidenceSource, RecordedSource, RemoteConfig, RemoteSource};

#[derive(Debug, Error)]
pub enum EngineConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("engine config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("engine config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Reads an engine config. Relative corpus paths resolve against the
/// config file's directory.
pub fn load_engine(path: &Path) -> Result<Box<dyn EvidenceSource>, EngineConfigError> {
    let content = std::fs::read_to_string(path).map_err(|source| EngineConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_engine(&content, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_engine(
    content: &str,
    base_dir: &Path,
) -> Result<Box<dyn EvidenceSource>, EngineConfigError> {
    let value: Value = serde_json::from_str(content)?;
    let object = value
        .as_object()
        .ok_or_else(|| EngineConfigError::Invalid("expected a JSON object".into()))?;
    let declared = object.get("type").and_then(Value::as_str);
    let kind = match declared {
        Some(t) => t,
        None if object.contains_key("corpus") => "offline",
        None if object.contains_key("hits") => "recorded",
        None if object.contains_key("url_template") => "remote",
        None => {
            return Err(EngineConfigError::Invalid(
                "cannot tell the backend: expected `type`, `corpus`, `hits` or `url_template`"
                    .into(),
            ))
        }
    };
    match kind {
        "offline" => {
            let engine_id = object
                .get("engine_id")
                .and_then(Value::as_str)
                .ok_or_else(|| EngineConfigError::Invalid("missing `engine_id`".into()))?;
            let corpus = object
                .get("corpus")
                .and_then(Value::as_str)
                .ok_or_else(|| EngineConfigError::Invalid("missing `corpus` path".into()))?;
            let corpus = Corpus::load(&base_dir.join(corpus))?.with_engine_id(engine_id);
            Ok(Box::new(corpus))
        }
        "recorded" => Ok(Box::new(RecordedSource::from_json(content)?)),
        "remote" => {
            let config: RemoteConfig = serde_json::from_value(value)?;
            Ok(Box::new(RemoteSource::new(config)))
        }
        other => Err(EngineConfigError::Invalid(format!(
            "unknown engine type `{other}`"
        ))),
    }
}
