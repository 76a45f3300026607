use std::collections::BTreeMap;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{EvidenceSource, ObservationKind, SourceError};
use crate::pattern::{render_phrases, Dialect};

/// Replays counts captured from another engine. Counts are keyed by the
/// plain-dialect rendering of the query (marker first, multiword terms
/// quoted), e.g. `eye "optic nerve"`.
#[derive(Debug, Clone)]
pub struct RecordedSource {
    engine_id: String,
    hits: BTreeMap<String, u64>,
    interest: Option<BTreeMap<String, u64>>,
    fingerprint: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordedDocument {
    engine_id: String,
    #[serde(default, rename = "type")]
    _type: Option<String>,
    #[serde(default)]
    hits: BTreeMap<String, u64>,
    #[serde(default)]
    interest: Option<BTreeMap<String, u64>>,
}

impl RecordedSource {
    pub fn from_json(content: &str) -> Result<Self, serde_json::Error> {
        let doc: RecordedDocument = serde_json::from_str(content)?;
        Ok(RecordedSource {
            fingerprint: hex::encode(Sha256::digest(content.as_bytes())),
            engine_id: doc.engine_id,
            hits: doc.hits,
            interest: doc.interest,
        })
    }
}

impl EvidenceSource for RecordedSource {
    fn engine_id(&self) -> &str {
        &self.engine_id
    }

    fn fingerprint(&self) -> String {
        self.fingerprint.clone()
    }

    fn count(
        &self,
        phrases: &[&str],
        kind: ObservationKind,
        year: Option<i32>,
    ) -> Result<u64, SourceError> {
        if year.is_some() {
            return Err(SourceError::Unsupported {
                engine_id: self.engine_id.clone(),
                what: "year filtering".into(),
            });
        }
        let table = match kind {
            ObservationKind::Hits => &self.hits,
            ObservationKind::Interest => {
                self.interest
                    .as_ref()
                    .ok_or_else(|| SourceError::Unsupported {
                        engine_id: self.engine_id.clone(),
                        what: "interest measurement".into(),
                    })?
            }
        };
        let query = render_phrases(phrases, Dialect::Plain);
        table
            .get(&query)
            .copied()
            .ok_or(SourceError::NotRecorded {
                engine_id: self.engine_id.clone(),
                kind,
                query,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replays_by_rendered_query() {
        let r = RecordedSource::from_json(
            r#"{"engine_id": "SE1", "hits": {"eye": 10, "eye \"optic nerve\"": 4}}"#,
        )
        .unwrap();
        assert_eq!(r.count(&["eye"], ObservationKind::Hits, None), Ok(10));
        assert_eq!(r.count(&["eye", "optic nerve"], ObservationKind::Hits, None), Ok(4));
        assert!(matches!(
            r.count(&["eye", "lens"], ObservationKind::Hits, None),
            Err(SourceError::NotRecorded { .. })
        ));
        assert!(matches!(
            r.count(&["eye"], ObservationKind::Interest, None),
            Err(SourceError::Unsupported { .. })
        ));
        assert!(matches!(
            r.count(&["eye"], ObservationKind::Hits, Some(2000)),
            Err(SourceError::Unsupported { .. })
        ));
    }
}
