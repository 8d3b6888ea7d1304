use std::path::PathBuf;

use saxnav_core::DEFAULT_MIN_FRACTION;

pub const DEFAULT_MAX_SERIES: usize = 10_000;
pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 512 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Uploads with more series are rejected.
    pub max_series: usize,
    /// Request body limit for uploads.
    pub max_upload_bytes: usize,
    pub min_fraction: f64,
    /// Write-through directory for session artifacts; `None` keeps sessions in memory only.
    pub cache_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_series: DEFAULT_MAX_SERIES,
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
            min_fraction: DEFAULT_MIN_FRACTION,
            cache_dir: None,
        }
    }
}
