use chrono::{DateTime, Utc};
use rusqlite::{params, OptionalExtension};

use super::{from_millis, parse_col, to_millis, Repo, StoreError};
use crate::domain::{AccountKind, AccountRef};

/// A persisted session, addressed by the digest of its bearer token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionRow {
    pub token_digest: String,
    pub principal: AccountRef,
    pub csrf_token: String,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
    pub revoked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResetRow {
    pub token_digest: String,
    pub principal: AccountRef,
    pub expires_at: DateTime<Utc>,
    pub used: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThrottleRow {
    pub failure_count: u32,
    pub window_start: DateTime<Utc>,
}

impl Repo<'_> {
    pub fn insert_session(&self, row: &SessionRow) -> Result<(), StoreError> {
        self.conn.execute(
            "INSERT INTO sessions (token_digest, principal_kind, principal_id, csrf_token, issued_at,
                                   expires_at, revoked)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
            params![
                row.token_digest,
                row.principal.kind.as_str(),
                row.principal.id,
                row.csrf_token,
                to_millis(row.issued_at),
                to_millis(row.expires_at),
                row.revoked
            ],
        )?;
        Ok(())
    }

    pub fn get_session(&self, digest: &str) -> Result<Option<SessionRow>, StoreError> {
        Ok(self
            .conn
            .query_row(
                "SELECT token_digest, principal_kind, principal_id, csrf_token, issued_at, expires_at, revoked
                 FROM sessions WHERE token_digest = ?1",
                [digest],
                |r| {
                    let kind: String = r.get(1)?;
                    Ok(SessionRow {
                        token_digest: r.get(0)?,
                        principal: AccountRef {
                            kind: parse_col(1, &kind, str::parse::<AccountKind>)?,
                            id: r.get(2)?,
                        },
                        csrf_token: r.get(3)?,
                        issued_at: from_millis(r.get(4)?),
                        expires_at: from_millis(r.get(5)?),
                        revoked: r.get(6)?,
                    })
                },
            )
            .optional()?)
    }

    /// Slides the idle expiry forward on a live session.
    pub fn touch_session(&self, digest: &str, expires_at: DateTime<Utc>) -> Result<(), StoreError> {
        self.conn.execute(
            "UPDATE sessions SET expires_at = ?2 WHERE token_digest = ?1 AND revoked = 0",
            params![digest, to_millis(expires_at)],
        )?;
        Ok(())
    }

    pub fn revoke_session(&self, digest: &str) -> Result<(), StoreError> {
        self.conn.execute(
            "UPDATE sessions SET revoked = 1 WHERE token_digest = ?1",
            [digest],
        )?;
        Ok(())
    }

    /// Revokes every live session of `principal` except `keep`, if given.
    pub fn revoke_sessions_of(
        &self,
        principal: AccountRef,
        keep: Option<&str>,
    ) -> Result<usize, StoreError> {
        Ok(self.conn.execute(
            "UPDATE sessions SET revoked = 1
             WHERE principal_kind = ?1 AND principal_id = ?2 AND revoked = 0
               AND (?3 IS NULL OR token_digest <> ?3)",
            params![principal.kind.as_str(), principal.id, keep],
        )?)
    }

    pub fn insert_reset_token(&self, row: &ResetRow) -> Result<(), StoreError> {
        self.conn.execute(
            "INSERT INTO reset_tokens (token_digest, principal_kind, principal_id, expires_at, used, created_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6)",
            params![
                row.token_digest,
                row.principal.kind.as_str(),
                row.principal.id,
                to_millis(row.expires_at),
                row.used,
                self.now_ms()
            ],
        )?;
        Ok(())
    }

    /// Marks an unused, unexpired token as used and returns its principal.
    /// Single statement, so two concurrent completions cannot both succeed.
    pub fn consume_reset_token(&self, digest: &str) -> Result<Option<AccountRef>, StoreError> {
        let n = self.conn.execute(
            "UPDATE reset_tokens SET used = 1 WHERE token_digest = ?1 AND used = 0 AND expires_at > ?2",
            params![digest, self.now_ms()],
        )?;
        if n == 0 {
            return Ok(None);
        }
        Ok(Some(self.conn.query_row(
            "SELECT principal_kind, principal_id FROM reset_tokens WHERE token_digest = ?1",
            [digest],
            |r| {
                let kind: String = r.get(0)?;
                Ok(AccountRef {
                    kind: parse_col(0, &kind, str::parse::<AccountKind>)?,
                    id: r.get(1)?,
                })
            },
        )?))
    }

    pub fn count_reset_tokens(&self) -> Result<i64, StoreError> {
        Ok(self
            .conn
            .query_row("SELECT COUNT(*) FROM reset_tokens", [], |r| r.get(0))?)
    }

    pub fn get_throttle(&self, key: &str) -> Result<Option<ThrottleRow>, StoreError> {
        Ok(self
            .conn
            .query_row(
                "SELECT failure_count, window_start FROM login_throttle WHERE throttle_key = ?1",
                [key],
                |r| {
                    Ok(ThrottleRow {
                        failure_count: r.get(0)?,
                        window_start: from_millis(r.get(1)?),
                    })
                },
            )
            .optional()?)
    }

    pub fn put_throttle(&self, key: &str, row: ThrottleRow) -> Result<(), StoreError> {
        self.conn.execute(
            "INSERT INTO login_throttle (throttle_key, failure_count, window_start) VALUES (?1, ?2, ?3)
             ON CONFLICT (throttle_key) DO UPDATE SET failure_count = ?2, window_start = ?3",
            params![key, row.failure_count, to_millis(row.window_start)],
        )?;
        Ok(())
    }

    pub fn clear_throttle(&self, key: &str) -> Result<(), StoreError> {
        self.conn
            .execute("DELETE FROM login_throttle WHERE throttle_key = ?1", [key])?;
        Ok(())
    }
}
