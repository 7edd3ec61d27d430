//! Fixed-window failure counting: `limit` failures inside `window` lock the
//! key until the window that started with the first failure has elapsed.

use chrono::{DateTime, Duration, Utc};

use crate::store::ThrottleRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThrottlePolicy {
    pub limit: u32,
    pub window: Duration,
}

impl Default for ThrottlePolicy {
    fn default() -> Self {
        Self {
            limit: 5,
            window: Duration::minutes(15),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThrottleDecision {
    Allowed,
    LockedOut,
}

impl ThrottlePolicy {
    fn current(&self, row: Option<ThrottleRow>, now: DateTime<Utc>) -> Option<ThrottleRow> {
        row.filter(|r| now - r.window_start < self.window)
    }

    pub fn check(&self, row: Option<ThrottleRow>, now: DateTime<Utc>) -> ThrottleDecision {
        match self.current(row, now) {
            Some(r) if r.failure_count >= self.limit => ThrottleDecision::LockedOut,
            _ => ThrottleDecision::Allowed,
        }
    }

    /// The row after one more failure at `now`.
    pub fn record_failure(&self, row: Option<ThrottleRow>, now: DateTime<Utc>) -> ThrottleRow {
        match self.current(row, now) {
            Some(r) => ThrottleRow {
                failure_count: r.failure_count.saturating_add(1),
                window_start: r.window_start,
            },
            None => ThrottleRow {
                failure_count: 1,
                window_start: now,
            },
        }
    }
}
