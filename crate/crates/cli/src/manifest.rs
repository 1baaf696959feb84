//! Run manifests: everything needed to re-run a result byte-identically.

use std::collections::BTreeMap;
use std::path::Path;

use bdsim_core::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: &str = "1";

/// How replicate streams derive from the master seed. Recorded verbatim so
/// external tooling can reproduce any single replicate in isolation.
pub const SEED_DERIVATION: &str = "root = RandomSource::new(seed, 0); replicate r uses \
    root.substream(r); substream(tag): stream_id' = mix64(stream_id ^ mix64(tag ^ \
    0x517CC1B727220A95)) with mix64 the SplitMix64 finalizer; draw k of a stream is word 0 \
    of Philox2x64-10(key = seed, counter = (stream_id, k))";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunManifest {
    pub schema_version: String,
    pub artifact_version: String,
    pub config: ExperimentConfig,
    pub seed_derivation: String,
    /// Wall-clock duration; the only field that varies between identical
    /// re-runs.
    pub duration_seconds: f64,
    /// SHA-256 of every result file written by the run.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(config: ExperimentConfig, duration_seconds: f64) -> RunManifest {
        RunManifest {
            schema_version: SCHEMA_VERSION.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seed_derivation: SEED_DERIVATION.to_string(),
            duration_seconds,
            outputs: BTreeMap::new(),
        }
    }

    pub fn record_output(&mut self, name: &str, bytes: &[u8]) {
        let mut h = Sha256::new();
        h.update(bytes);
        self.outputs.insert(name.to_string(), hex::encode(h.finalize()));
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Configuration(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Configuration(format!("bad manifest {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization is infallible")
    }
}
