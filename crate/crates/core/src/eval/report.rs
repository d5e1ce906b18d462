use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::eer::EerResult;
use super::pooled::PooledTable;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionInfo {
    pub inputs: Vec<String>,
    pub weights: Vec<f64>,
    pub method: String,
}

/// Everything an evaluation run reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub overall: EerResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pooled_by_attack: Option<PooledTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pooled_by_codec: Option<PooledTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fusion: Option<FusionInfo>,
    pub provenance: BTreeMap<String, serde_json::Value>,
}

impl EvalReport {
    pub fn new(overall: EerResult) -> Self {
        let mut provenance = BTreeMap::new();
        provenance.insert(
            "toolkit".into(),
            serde_json::Value::String(format!("spoofaug {}", env!("CARGO_PKG_VERSION"))),
        );
        Self {
            overall,
            pooled_by_attack: None,
            pooled_by_codec: None,
            fusion: None,
            provenance,
        }
    }

    pub fn with_provenance(mut self, key: &str, value: impl Serialize) -> Result<Self> {
        self.provenance
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(self)
    }

    /// Pretty JSON with 2-space indent, keys sorted lexicographically at
    /// every level, trailing newline.
    pub fn to_json(&self) -> Result<String> {
        // Value objects are BTreeMap-backed, so keys come out sorted.
        let value = serde_json::to_value(self)?;
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        Ok(text)
    }
}

pub fn write_report(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, report.to_json()?)?;
    Ok(())
}
