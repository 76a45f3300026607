//! Run manifests embedded in every emitted report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Everything needed to reproduce a run. Two runs with equal manifests
/// (timestamps aside) over equal fixtures produce equal outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pattern_digests: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub engine_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year_range: Option<(i32, i32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub discounts: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount_style: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub timestamp: String,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, timestamp: String) -> Self {
        RunManifest {
            command: command.to_string(),
            pattern_digests: Vec::new(),
            engine_ids: Vec::new(),
            year: None,
            year_range: None,
            mode: None,
            partition: None,
            discounts: BTreeMap::new(),
            discount_style: None,
            seed: None,
            timestamp,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Equality ignoring the timestamp.
    pub fn same_run(&self, other: &RunManifest) -> bool {
        RunManifest {
            timestamp: String::new(),
            ..self.clone()
        } == RunManifest {
            timestamp: String::new(),
            ..other.clone()
        }
    }
}
