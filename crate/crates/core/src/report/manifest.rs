use std::path::PathBuf;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::hazard::FitProvenance;
use crate::outage::Scenario;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

/// Contents of `manifest.json`: everything needed to trace a run back to
/// its inputs. The only fields that change between identical runs are
/// `started_at` and `wall_clock_seconds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub engine_version: String,
    pub config_hash: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub n_trials: u64,
    pub threads: usize,
    pub started_at: DateTime<Utc>,
    pub wall_clock_seconds: f64,
    pub inputs: Vec<InputDigest>,
    pub rr_fit: Option<FitProvenance>,
    pub productivity_fit: Option<FitProvenance>,
    pub outputs: Vec<OutputDigest>,
}
