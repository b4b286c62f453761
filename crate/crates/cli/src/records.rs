//! JSONL record shapes passed between pipeline stages.

use placebench::layoutgen::{LayoutSample, MaskedLayoutRecord};
use placebench::PlacedTransistor;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub id: String,
    pub sample_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub prompt: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub id: String,
    pub sample_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub output: String,
}

/// Placements produced by extraction or a baseline placer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub id: String,
    pub sample_seed: u64,
    pub method: String,
    pub placements: Vec<PlacedTransistor>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Any record that can stand for a layout.
#[derive(Debug, Clone)]
pub enum AnyRecord {
    Sample(Box<LayoutSample>),
    Placement(PlacementRecord),
    Masked(MaskedLayoutRecord),
    Raw(RawRecord),
}

impl AnyRecord {
    pub fn from_value(v: Value, line: usize) -> Result<Self, CliError> {
        let has = |k: &str| v.get(k).is_some();
        let kind = if has("specs") && has("placements") {
            "sample"
        } else if has("placements") && has("method") {
            "placement"
        } else if has("fixed") && has("answer") {
            "masked"
        } else if has("output") {
            "raw"
        } else {
            return Err(CliError::data(format!("record {line}: unrecognized record shape")));
        };
        let bad = |e: serde_json::Error| CliError::data(format!("record {line}: {e}"));
        Ok(match kind {
            "sample" => AnyRecord::Sample(Box::new(serde_json::from_value(v).map_err(bad)?)),
            "placement" => AnyRecord::Placement(serde_json::from_value(v).map_err(bad)?),
            "masked" => AnyRecord::Masked(serde_json::from_value(v).map_err(bad)?),
            _ => AnyRecord::Raw(serde_json::from_value(v).map_err(bad)?),
        })
    }
}
