//! Machine-readable run reports.

use onticlab::Tolerances;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

/// Everything except `timings` is a function of the inputs, the
/// tolerances and the tool version.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    pub inputs: Value,
    pub inputs_digest: String,
    pub tolerances: Tolerances,
    pub results: Value,
    pub timings: Timings,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunReport {
    pub fn new(command: &str, inputs: Value, tolerances: Tolerances, results: Value, total_ms: f64) -> Self {
        let tool_version = env!("CARGO_PKG_VERSION").to_owned();
        let canonical = serde_json::json!({
            "command": command,
            "inputs": inputs,
            "tolerances": tolerances,
            "tool_version": tool_version,
        });
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.to_owned(),
            inputs_digest: sha256_hex(canonical.to_string().as_bytes()),
            tool_version,
            inputs,
            tolerances,
            results,
            timings: Timings { total_ms },
        }
    }
}
