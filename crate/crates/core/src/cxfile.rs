//! Versioned on-disk form of a [`Counterexample`].
//!
//! Top-level keys, in order: `format_version`, `tool_version`, `instance`.
//! Inside `instance` fields follow the declaration order of
//! [`Counterexample`]. Big integers are decimal strings, rationals `"num/den"`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forge::Counterexample;

pub const FORMAT_VERSION: &str = "gapforge-cx/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CxFileError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing format_version")]
    MissingVersion,
    #[error("unsupported format_version {0:?}, expected {FORMAT_VERSION:?}")]
    UnknownVersion(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CxFile {
    pub format_version: String,
    pub tool_version: String,
    pub instance: Counterexample,
}

impl CxFile {
    pub fn new(instance: Counterexample) -> Self {
        CxFile {
            format_version: FORMAT_VERSION.into(),
            tool_version: TOOL_VERSION.into(),
            instance,
        }
    }
}

/// Pretty JSON with a trailing newline; identical inputs give identical bytes.
pub fn serialize(file: &CxFile) -> String {
    let mut out = serde_json::to_string_pretty(file).expect("plain data serializes");
    out.push('\n');
    out
}

/// Checks the version before decoding the instance.
pub fn parse(text: &str) -> Result<CxFile, CxFileError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("format_version").and_then(|v| v.as_str()) {
        None => return Err(CxFileError::MissingVersion),
        Some(v) if v != FORMAT_VERSION => return Err(CxFileError::UnknownVersion(v.into())),
        Some(_) => {}
    }
    Ok(serde_json::from_value(value)?)
}
