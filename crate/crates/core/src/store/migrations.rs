use chrono::{DateTime, Utc};
use rusqlite::{params, Connection, OptionalExtension, TransactionBehavior};
use serde::Serialize;

use super::{from_millis, to_millis, StoreError};

#[derive(Debug)]
pub struct Migration {
    pub ordinal: u32,
    /// File stem, `NNNN_description`.
    pub name: &'static str,
    pub sql: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AppliedMigration {
    pub ordinal: u32,
    pub description: String,
    pub applied_at: DateTime<Utc>,
}

macro_rules! migration {
    ($ordinal:literal, $name:literal) => {
        Migration {
            ordinal: $ordinal,
            name: $name,
            sql: include_str!(concat!("../../migrations/", $name, ".sql")),
        }
    };
}

pub static MIGRATIONS: &[Migration] = &[
    migration!(1, "0001_create_institution"),
    migration!(2, "0002_create_onboarding"),
    migration!(3, "0003_create_academics"),
    migration!(4, "0004_create_security_state"),
    migration!(5, "0005_create_audit_log"),
];

const LEDGER: &str = "CREATE TABLE IF NOT EXISTS schema_migrations (
    ordinal     INTEGER PRIMARY KEY NOT NULL,
    description TEXT NOT NULL,
    applied_at  INTEGER NOT NULL
)";

pub(super) fn applied(conn: &Connection) -> Result<Vec<AppliedMigration>, StoreError> {
    let exists: Option<String> = conn
        .query_row(
            "SELECT name FROM sqlite_master WHERE type = 'table' AND name = 'schema_migrations'",
            [],
            |row| row.get(0),
        )
        .optional()?;
    if exists.is_none() {
        return Ok(Vec::new());
    }
    let mut stmt = conn.prepare(
        "SELECT ordinal, description, applied_at FROM schema_migrations ORDER BY ordinal",
    )?;
    let rows = stmt
        .query_map([], |row| {
            Ok(AppliedMigration {
                ordinal: row.get(0)?,
                description: row.get(1)?,
                applied_at: from_millis(row.get(2)?),
            })
        })?
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows)
}

/// Applies every migration with `ordinal <= target` not yet recorded, each
/// in its own transaction, in ascending order.
pub(super) fn apply(
    conn: &mut Connection,
    target: u32,
    now: DateTime<Utc>,
) -> Result<Vec<AppliedMigration>, StoreError> {
    conn.execute_batch(LEDGER)?;
    let mut newly = Vec::new();
    for migration in MIGRATIONS.iter().filter(|m| m.ordinal <= target) {
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let top: u32 = tx.query_row(
            "SELECT COALESCE(MAX(ordinal), 0) FROM schema_migrations",
            [],
            |row| row.get(0),
        )?;
        if migration.ordinal <= top {
            continue;
        }
        tx.execute_batch(migration.sql)?;
        tx.execute(
            "INSERT INTO schema_migrations (ordinal, description, applied_at) VALUES (?1, ?2, ?3)",
            params![migration.ordinal, migration.name, to_millis(now)],
        )?;
        tx.commit()?;
        tracing::info!(migration = migration.name, "applied migration");
        newly.push(AppliedMigration {
            ordinal: migration.ordinal,
            description: migration.name.to_owned(),
            applied_at: now,
        });
    }
    Ok(newly)
}
