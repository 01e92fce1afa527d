//! Run manifests: every command writes one alongside its outputs, recording
//! the effective configuration and search statistics for auditability.

use anyhow::Result;
use fsplan_core::rover::RoverParams;
use fsplan_core::search::{SearchOptions, SearchStats};
use serde::Serialize;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Serialize)]
pub struct EffectiveOptions {
    pub workers: usize,
    pub compact_hash: bool,
    pub memory_cap_bytes: u64,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub config_hash: String,
    pub options: EffectiveOptions,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<SearchStats>,
    pub exit_status: u8,
    /// Seconds since the epoch; the only field expected to differ between
    /// identical runs.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_path: &Path,
        params: &RoverParams,
        options: &SearchOptions,
    ) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            config_path: config_path.display().to_string(),
            config_hash: params.config_hash(),
            options: EffectiveOptions {
                workers: options.workers,
                compact_hash: options.compaction.is_some(),
                memory_cap_bytes: options.memory_cap_bytes,
            },
            outputs: Vec::new(),
            stats: None,
            exit_status: 0,
            timestamp: 0,
        }
    }

    pub fn finish(&mut self, exit_status: u8, outputs: &[&Path]) {
        self.exit_status = exit_status;
        self.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
        self.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
