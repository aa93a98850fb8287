//! Run manifests embedded into every output file.
//!
//! Each artifact starts with `#`-prefixed header lines recording the tool
//! version, the command and every input that shaped the run, so any output
//! can be reproduced from its own header.

use std::fmt::Display;

/// Ordered key/value description of one command invocation.
#[derive(Debug, Clone)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self {
            entries: Vec::new(),
        };
        m.push("mfgp-version", env!("CARGO_PKG_VERSION"));
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// The comment block prepended to output files.
    pub fn header(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out
    }
}
