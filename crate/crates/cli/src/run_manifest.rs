//! Run manifest written alongside every output artifact: the command, the
//! fully resolved configuration, the seed, the toolkit version, the dataset
//! root, and timestamps. Re-running the recorded command with the recorded
//! seed reproduces the artifact bit for bit (timestamps aside).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::AppError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub dataset_root: Option<String>,
    pub config: serde_json::Value,
    pub tuned_threshold: Option<f64>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn new(
        command: &str,
        seed: u64,
        dataset_root: Option<&Path>,
        config: serde_json::Value,
    ) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            dataset_root: dataset_root.map(|p| p.to_string_lossy().into_owned()),
            config,
            tuned_threshold: None,
            started_unix: now_unix(),
            finished_unix: 0,
        }
    }

    /// Stamps the finish time and writes the manifest as pretty JSON.
    pub fn finish_and_save(mut self, path: &Path) -> Result<(), AppError> {
        self.finished_unix = now_unix();
        let mut json = serde_json::to_string_pretty(&self).map_err(AppError::data)?;
        json.push('\n');
        fs::write(path, json).map_err(AppError::data)
    }

    pub fn load(path: &Path) -> Result<RunManifest, AppError> {
        let text = fs::read_to_string(path)
            .map_err(|e| AppError::Data(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(AppError::data)
    }
}

/// `model.ckpt` -> `model.ckpt.history.csv` and friends.
pub fn path_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
