//! Session lifetime rules.

use chrono::{DateTime, Duration, Utc};

use crate::store::SessionRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionPolicy {
    /// Idle lifetime; every authenticated request slides it forward.
    pub idle_ttl: Duration,
}

impl Default for SessionPolicy {
    fn default() -> Self {
        Self {
            idle_ttl: Duration::minutes(120),
        }
    }
}

impl SessionPolicy {
    pub fn expiry_from(&self, now: DateTime<Utc>) -> DateTime<Utc> {
        now + self.idle_ttl
    }

    pub fn is_live(&self, row: &SessionRow, now: DateTime<Utc>) -> bool {
        !row.revoked && now < row.expires_at
    }
}
