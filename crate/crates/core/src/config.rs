//! Runtime configuration for the service core.

use std::path::PathBuf;

use chrono::Duration;

use crate::demo::Weaknesses;
use crate::security::{EncryptionKey, HashPolicy, SessionPolicy, ThrottlePolicy};

pub const DEFAULT_SESSION_YEAR: i32 = 2019;
pub const MAX_UPLOAD_BYTES: u64 = 10 * 1024 * 1024;
pub const MAX_ROSTER_LINES: usize = 10_000;
pub const MAX_PINS_PER_REQUEST: u32 = 500;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub storage_path: PathBuf,
    /// Sealed course materials live here, under random names.
    pub upload_dir: PathBuf,
    pub encryption_key: EncryptionKey,
    pub hash_policy: HashPolicy,
    pub session: SessionPolicy,
    pub throttle: ThrottlePolicy,
    pub reset_token_ttl: Duration,
    pub max_upload_bytes: u64,
    /// Academic year created as the current session on first seed.
    pub session_year: i32,
    pub weaknesses: Weaknesses,
}

impl ServiceConfig {
    /// Defaults for everything except the locations and the key.
    pub fn new(
        storage_path: impl Into<PathBuf>,
        upload_dir: impl Into<PathBuf>,
        encryption_key: EncryptionKey,
    ) -> Self {
        Self {
            storage_path: storage_path.into(),
            upload_dir: upload_dir.into(),
            encryption_key,
            hash_policy: HashPolicy::default(),
            session: SessionPolicy::default(),
            throttle: ThrottlePolicy::default(),
            reset_token_ttl: Duration::minutes(30),
            max_upload_bytes: MAX_UPLOAD_BYTES,
            session_year: DEFAULT_SESSION_YEAR,
            weaknesses: Weaknesses::none(),
        }
    }
}
