//! Security audit trail: authentication events, denials and every state
//! change, appended to the store's write-once audit table.

use serde_json::Value;

use crate::demo::{Weakness, Weaknesses};
use crate::store::{Outcome, Repo, StoreError};

/// Actor recorded for requests without a session.
pub const ANONYMOUS: &str = "anonymous";

#[derive(Debug, Clone)]
pub struct AuditEntry {
    pub actor: String,
    pub action: &'static str,
    pub target: String,
    pub outcome: Outcome,
    pub details: Value,
}

impl AuditEntry {
    pub fn new(
        actor: impl Into<String>,
        action: &'static str,
        target: impl Into<String>,
        outcome: Outcome,
    ) -> Self {
        Self {
            actor: actor.into(),
            action,
            target: target.into(),
            outcome,
            details: Value::Object(Default::default()),
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }
}

pub(crate) fn write(
    repo: &Repo<'_>,
    weaknesses: &Weaknesses,
    entry: &AuditEntry,
) -> Result<(), StoreError> {
    if weaknesses.contains(Weakness::Logging) {
        return Ok(());
    }
    repo.append_audit(
        &entry.actor,
        entry.action,
        &entry.target,
        entry.outcome,
        &entry.details,
    )?;
    Ok(())
}
