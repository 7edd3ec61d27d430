use chrono::{DateTime, Utc};
use rusqlite::params;
use serde::Serialize;

use super::{from_millis, Repo, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Failure,
    Denied,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Failure => "failure",
            Outcome::Denied => "denied",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRecord {
    pub id: i64,
    pub at: DateTime<Utc>,
    pub actor: String,
    pub action: String,
    pub target: String,
    pub outcome: String,
    pub details: serde_json::Value,
}

impl Repo<'_> {
    pub fn append_audit(
        &self,
        actor: &str,
        action: &str,
        target: &str,
        outcome: Outcome,
        details: &serde_json::Value,
    ) -> Result<i64, StoreError> {
        self.conn.execute(
            "INSERT INTO audit_records (at, actor, action, target, outcome, details)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6)",
            params![
                self.now_ms(),
                actor,
                action,
                target,
                outcome.as_str(),
                details.to_string()
            ],
        )?;
        Ok(self.conn.last_insert_rowid())
    }

    /// Records with `id > after`, oldest first, optionally for one action.
    pub fn audit_since(
        &self,
        after: i64,
        action: Option<&str>,
    ) -> Result<Vec<AuditRecord>, StoreError> {
        let mut stmt = self.conn.prepare(
            "SELECT id, at, actor, action, target, outcome, details FROM audit_records
             WHERE id > ?1 AND (?2 IS NULL OR action = ?2) ORDER BY id",
        )?;
        let rows = stmt
            .query_map(params![after, action], |r| {
                let details: String = r.get(6)?;
                Ok(AuditRecord {
                    id: r.get(0)?,
                    at: from_millis(r.get(1)?),
                    actor: r.get(2)?,
                    action: r.get(3)?,
                    target: r.get(4)?,
                    outcome: r.get(5)?,
                    details: serde_json::from_str(&details).unwrap_or(serde_json::Value::Null),
                })
            })?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    pub fn audit_len(&self) -> Result<i64, StoreError> {
        Ok(self
            .conn
            .query_row("SELECT COALESCE(MAX(id), 0) FROM audit_records", [], |r| {
                r.get(0)
            })?)
    }
}
