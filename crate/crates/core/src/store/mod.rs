//! Embedded relational storage.
//!
//! One SQLite file in WAL mode behind a small connection pool. Every query
//! binds caller-supplied values as parameters. The single exception is a
//! lookup compiled only with the `insecure-demo` feature.
//!
//! Multi-row mutations go through [`Store::within_transaction`], which takes
//! the database write lock up front (`BEGIN IMMEDIATE`) so read-then-write
//! sequences inside one unit of work cannot interleave with another writer.

mod academics;
mod accounts;
mod audit;
mod migrations;
mod onboarding;
mod security;
mod seed;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use r2d2::{Pool, PooledConnection};
use r2d2_sqlite::SqliteConnectionManager;
use rusqlite::{ffi, Connection, ErrorCode, TransactionBehavior};
use thiserror::Error;

use crate::clock::Clock;

pub use academics::{CourseEdit, NewCourse, ResultRow, RosterRow};
pub use accounts::{CadetEdit, NewAdmin, NewCadet, NewStaff, StaffEdit};
pub use audit::{AuditRecord, Outcome};
pub use migrations::{AppliedMigration, Migration, MIGRATIONS};
pub use onboarding::PinClaim;
pub use security::{ResetRow, SessionRow, ThrottleRow};
pub use seed::Seed;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("duplicate key ({0})")]
    DuplicateKey(String),
    #[error("foreign key violation")]
    ForeignKeyViolation,
    #[error("not found")]
    NotFound,
    #[error("pin not found")]
    PinNotFound,
    #[error("pin already consumed")]
    PinAlreadyConsumed,
    #[error("pin scope mismatch")]
    PinScopeMismatch,
    #[error("constraint violated ({0})")]
    CheckViolation(String),
    #[error("storage unavailable: {0}")]
    Unavailable(String),
    #[error("schema migrations are pending")]
    NotMigrated,
    #[error("corrupt row: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sqlite(rusqlite::Error),
}

impl From<rusqlite::Error> for StoreError {
    fn from(err: rusqlite::Error) -> Self {
        match &err {
            rusqlite::Error::QueryReturnedNoRows => StoreError::NotFound,
            rusqlite::Error::SqliteFailure(e, msg) => {
                let msg = msg.clone().unwrap_or_default();
                match e.extended_code {
                    ffi::SQLITE_CONSTRAINT_UNIQUE | ffi::SQLITE_CONSTRAINT_PRIMARYKEY => {
                        StoreError::DuplicateKey(constraint_target(&msg))
                    }
                    ffi::SQLITE_CONSTRAINT_FOREIGNKEY => StoreError::ForeignKeyViolation,
                    ffi::SQLITE_CONSTRAINT_CHECK
                    | ffi::SQLITE_CONSTRAINT_NOTNULL
                    | ffi::SQLITE_CONSTRAINT_TRIGGER => StoreError::CheckViolation(msg),
                    _ => match e.code {
                        ErrorCode::DatabaseBusy
                        | ErrorCode::DatabaseLocked
                        | ErrorCode::CannotOpen
                        | ErrorCode::ReadOnly => StoreError::Unavailable(e.to_string()),
                        _ => StoreError::Sqlite(err),
                    },
                }
            }
            _ => StoreError::Sqlite(err),
        }
    }
}

/// "UNIQUE constraint failed: staff.email" -> "staff.email"
fn constraint_target(msg: &str) -> String {
    msg.rsplit_once(": ").map_or(msg, |(_, t)| t).to_owned()
}

impl From<r2d2::Error> for StoreError {
    fn from(err: r2d2::Error) -> Self {
        StoreError::Unavailable(err.to_string())
    }
}

pub(crate) fn to_millis(at: DateTime<Utc>) -> i64 {
    at.timestamp_millis()
}

pub(crate) fn from_millis(ms: i64) -> DateTime<Utc> {
    DateTime::from_timestamp_millis(ms).unwrap_or_default()
}

/// Column-level parse helper for text-encoded enums and newtypes.
pub(crate) fn parse_col<T, E>(
    idx: usize,
    raw: &str,
    parse: impl FnOnce(&str) -> Result<T, E>,
) -> rusqlite::Result<T>
where
    E: std::error::Error + Send + Sync + 'static,
{
    parse(raw).map_err(|e| {
        rusqlite::Error::FromSqlConversionFailure(idx, rusqlite::types::Type::Text, Box::new(e))
    })
}

/// A view of the database for one unit of work. `now` is sampled once
/// when the unit starts, so every timestamp it writes agrees.
pub struct Repo<'c> {
    conn: &'c Connection,
    now: DateTime<Utc>,
}

impl<'c> Repo<'c> {
    pub fn new(conn: &'c Connection, now: DateTime<Utc>) -> Self {
        Self { conn, now }
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.now
    }

    pub fn conn(&self) -> &Connection {
        self.conn
    }

    fn now_ms(&self) -> i64 {
        to_millis(self.now)
    }
}

#[derive(Clone)]
pub struct Store {
    pool: Pool<SqliteConnectionManager>,
    path: PathBuf,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("path", &self.path)
            .finish_non_exhaustive()
    }
}

impl Store {
    pub fn open(path: impl AsRef<Path>, clock: Arc<dyn Clock>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        {
            let conn = Connection::open(&path)?;
            conn.pragma_update(None, "journal_mode", "WAL")?;
        }
        let manager = SqliteConnectionManager::file(&path).with_init(|c| {
            c.execute_batch(
                "PRAGMA foreign_keys = ON;
                 PRAGMA busy_timeout = 30000;
                 PRAGMA synchronous = NORMAL;",
            )
        });
        let pool = Pool::builder()
            .max_size(16)
            .connection_timeout(Duration::from_secs(60))
            .build(manager)?;
        Ok(Self { pool, path, clock })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    fn conn(&self) -> Result<PooledConnection<SqliteConnectionManager>, StoreError> {
        Ok(self.pool.get()?)
    }

    /// Runs `work` on an autocommit connection. Suitable for reads and for
    /// single-statement writes.
    pub fn read<T, E>(&self, work: impl FnOnce(&Repo<'_>) -> Result<T, E>) -> Result<T, E>
    where
        E: From<StoreError>,
    {
        let conn = self.conn()?;
        work(&Repo::new(&conn, self.clock.now()))
    }

    /// Runs `work` in a write transaction. Commits when it returns `Ok`,
    /// rolls back every effect when it returns `Err` (or panics).
    pub fn within_transaction<T, E>(
        &self,
        work: impl FnOnce(&Repo<'_>) -> Result<T, E>,
    ) -> Result<T, E>
    where
        E: From<StoreError>,
    {
        let mut conn = self.conn()?;
        let tx = conn
            .transaction_with_behavior(TransactionBehavior::Immediate)
            .map_err(StoreError::from)?;
        let out = work(&Repo::new(&tx, self.clock.now()))?;
        tx.commit().map_err(StoreError::from)?;
        Ok(out)
    }

    /// Single-use pin redemption as one conditional update. Exactly one of
    /// any number of concurrent callers for the same pin can succeed.
    pub fn redeem_pin_atomically(
        &self,
        pin_code: &str,
        claim: &PinClaim,
    ) -> Result<crate::domain::RegistrationPin, StoreError> {
        self.read(|repo| repo.redeem_pin(pin_code, claim))
    }

    pub fn migrate(&self) -> Result<Vec<AppliedMigration>, StoreError> {
        self.migrate_to(u32::MAX)
    }

    pub fn migrate_to(&self, target: u32) -> Result<Vec<AppliedMigration>, StoreError> {
        let mut conn = self.conn()?;
        migrations::apply(&mut conn, target, self.clock.now())
    }

    pub fn applied_migrations(&self) -> Result<Vec<AppliedMigration>, StoreError> {
        let conn = self.conn()?;
        migrations::applied(&conn)
    }

    pub fn pending_migrations(&self) -> Result<Vec<&'static Migration>, StoreError> {
        let applied = self.applied_migrations()?;
        let top = applied.iter().map(|m| m.ordinal).max().unwrap_or(0);
        Ok(MIGRATIONS.iter().filter(|m| m.ordinal > top).collect())
    }

    pub fn ensure_migrated(&self) -> Result<(), StoreError> {
        if self.pending_migrations()?.is_empty() {
            Ok(())
        } else {
            Err(StoreError::NotMigrated)
        }
    }

    pub fn seed(&self, seed: &Seed) -> Result<(), StoreError> {
        self.within_transaction(|repo| seed.apply(repo))
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::clock::ManualClock;

    pub struct TempStore {
        pub store: Store,
        pub clock: Arc<ManualClock>,
        _dir: tempfile::TempDir,
    }

    pub fn migrated() -> TempStore {
        let dir = tempfile::tempdir().unwrap();
        let clock = Arc::new(ManualClock::new(
            DateTime::from_timestamp(1_560_000_000, 0).unwrap(),
        ));
        let store = Store::open(dir.path().join("sims.db"), clock.clone()).unwrap();
        store.migrate().unwrap();
        TempStore {
            store,
            clock,
            _dir: dir,
        }
    }
}
