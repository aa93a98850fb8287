//! Versioned on-disk model files.
//!
//! Models are stored as JSON with a format-version integer; loading a file
//! written by a newer format fails cleanly. JSON float round-tripping is
//! exact, so a saved model reproduces in-process predictions bitwise.

use std::path::Path;

use mfgp::surrogates::TrainedSurrogate;
use serde::{Deserialize, Serialize};

use crate::commands::{write_atomic, CliError};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    tool_version: String,
    model: TrainedSurrogate,
}

pub fn save_model(path: &Path, model: &TrainedSurrogate) -> Result<(), CliError> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        model: model.clone(),
    };
    let json = serde_json::to_string(&file)
        .map_err(|e| CliError::Input(format!("cannot serialize model: {e}")))?;
    write_atomic(path, &json)
}

pub fn load_model(path: &Path) -> Result<TrainedSurrogate, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read model file {}: {e}", path.display())))?;
    // check the version first: a newer format's payload may not even parse
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("malformed model file {}: {e}", path.display())))?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| {
            CliError::Input(format!(
                "model file {} has no format_version field",
                path.display()
            ))
        })?;
    if version > MODEL_FORMAT_VERSION as u64 {
        return Err(CliError::Input(format!(
            "model file format version {version} is newer than supported version {MODEL_FORMAT_VERSION}"
        )));
    }
    let file: ModelFile = serde_json::from_value(value)
        .map_err(|e| CliError::Input(format!("malformed model file {}: {e}", path.display())))?;
    Ok(file.model)
}
