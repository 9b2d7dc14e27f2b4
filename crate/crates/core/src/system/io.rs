use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CurvaturePath, TimelikeSolution};
use crate::error::{Error, Result};

/// On-disk problem description. Matrices are row-major arrays of length `n*n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub g: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    #[serde(rename = "R")]
    pub r: CurvaturePath,
    #[serde(rename = "Y")]
    pub y: TimelikeSolution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        crate::report::to_json(self)
    }
}
