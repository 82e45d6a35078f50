use chrono::{DateTime, SecondsFormat, Utc};
use montecarlo::ExperimentConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Version of the report file layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    /// SHA-256 of the canonical JSON of the experiment configs.
    pub config_hash: String,
    pub master_seed: u64,
    pub started: String,
    pub finished: String,
    pub command_line: Vec<String>,
}

pub fn config_hash(configs: &[ExperimentConfig]) -> String {
    let bytes = serde_json::to_vec(configs).expect("configs serialize");
    hex::encode(Sha256::digest(&bytes))
}

impl RunManifest {
    pub fn new(configs: &[ExperimentConfig], started: DateTime<Utc>, argv: &[String]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(configs),
            master_seed: configs.first().map_or(0, |c| c.seed),
            started: started.to_rfc3339_opts(SecondsFormat::Millis, true),
            finished: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            command_line: argv.to_vec(),
        }
    }
}
