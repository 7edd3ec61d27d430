//! Login, sessions, CSRF, throttling and password changes.

use chrono::{DateTime, Utc};
use serde::Serialize;
use serde_json::json;

use crate::access::{Action, Principal};
use crate::audit_log::{AuditEntry, ANONYMOUS};
use crate::demo::Weakness;
use crate::domain::{validate_email, AccountKind, AccountRef, Role};
use crate::error::{Error, Result};
use crate::security::password::check_strength;
use crate::security::{ct_eq, digest, random_token, EncryptionKey, SealedBlob, ThrottleDecision};
use crate::service::Sims;
use crate::store::{AuditRecord, Outcome, Repo, ResetRow, SessionRow, StoreError};

/// Associated data binding sealed reset tokens to their purpose.
const RESET_DELIVERY_CONTEXT: &[u8] = b"password-reset-delivery";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoginOutcome {
    /// Bearer token for the session cookie. Never persisted.
    #[serde(skip)]
    pub token: String,
    pub csrf_token: String,
    pub principal: Principal,
    pub expires_at: DateTime<Utc>,
}

/// A validated session and the principal behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Authenticated {
    pub principal: Principal,
    pub csrf_token: String,
    pub token_digest: String,
}

/// Throttle key for login attempts.
pub fn login_key(kind: AccountKind, email: &str, source: &str) -> String {
    format!("login:{kind}:{}:{source}", email.trim().to_lowercase())
}

/// Throttle key for failed pin redemptions from one source.
pub fn registration_key(source: &str) -> String {
    format!("register:{source}")
}

impl Sims {
    pub fn check_throttle(&self, key: &str) -> Result<ThrottleDecision> {
        if self.config().weaknesses.contains(Weakness::Throttle) {
            return Ok(ThrottleDecision::Allowed);
        }
        let policy = self.config().throttle;
        self.read(|repo| Ok(policy.check(repo.get_throttle(key)?, repo.now())))
    }

    pub fn record_failure(&self, key: &str) -> Result<()> {
        let policy = self.config().throttle;
        self.tx(|repo| {
            let row = policy.record_failure(repo.get_throttle(key)?, repo.now());
            Ok(repo.put_throttle(key, row)?)
        })
    }

    pub fn reset_throttle(&self, key: &str) -> Result<()> {
        self.read(|repo| Ok(repo.clear_throttle(key)?))
    }

    pub(crate) fn ensure_not_throttled(&self, key: &str) -> Result<()> {
        match self.check_throttle(key)? {
            ThrottleDecision::Allowed => Ok(()),
            ThrottleDecision::LockedOut => Err(Error::LockedOut),
        }
    }

    fn find_credentials(
        &self,
        repo: &Repo<'_>,
        kind: AccountKind,
        email: &str,
    ) -> Result<Option<(i64, String)>, StoreError> {
        #[cfg(feature = "insecure-demo")]
        if self.config().weaknesses.contains(Weakness::Injection) {
            return repo.find_credentials_concatenated(kind, email);
        }
        repo.find_credentials(kind, email)
    }

    /// Verifies credentials against the `kind` account table and opens a
    /// fresh session. `prior_token`, if present, is revoked so a session id
    /// chosen before login never survives it.
    pub fn login(
        &self,
        kind: AccountKind,
        email: &str,
        password: &str,
        source: &str,
        prior_token: Option<&str>,
    ) -> Result<LoginOutcome> {
        let key = login_key(kind, email, source);
        let fail = |reason: &'static str| -> Result<LoginOutcome> {
            let mut details = json!({ "kind": kind.as_str(), "reason": reason, "source": source });
            if self.config().weaknesses.contains(Weakness::PlaintextLeak) {
                details["password"] = json!(password);
            }
            let entry = AuditEntry::new(
                ANONYMOUS,
                Action::Login.as_str(),
                email.trim().to_lowercase(),
                Outcome::Failure,
            )
            .with_details(details);
            self.read(|repo| Ok(self.audit(repo, &entry)?))?;
            Err(if reason == "throttled" {
                Error::LockedOut
            } else {
                Error::InvalidCredentials
            })
        };
        if self.ensure_not_throttled(&key).is_err() {
            return fail("throttled");
        }
        let normalized = validate_email(email).unwrap_or_else(|_| email.to_owned());
        let found = self.read(|repo| Ok(self.find_credentials(repo, kind, &normalized)?))?;
        let verified = match &found {
            Some((_, hash)) => self.hasher().verify(password, hash).unwrap_or(false),
            None => self.hasher().verify_dummy(password),
        };
        let id = match (found, verified) {
            (Some((id, _)), true) => id,
            _ => {
                self.record_failure(&key)?;
                return fail("invalid_credentials");
            }
        };
        self.reset_throttle(&key)?;
        let account = AccountRef { kind, id };
        let principal = self.principal_for(account)?;
        let token = random_token();
        let csrf_token = random_token();
        let expires_at = self.tx(|repo| {
            if let Some(prior) = prior_token {
                repo.revoke_session(&digest(prior))?;
            }
            let now = repo.now();
            let row = SessionRow {
                token_digest: digest(&token),
                principal: account,
                csrf_token: csrf_token.clone(),
                issued_at: now,
                expires_at: self.config().session.expiry_from(now),
                revoked: false,
            };
            repo.insert_session(&row)?;
            let entry = AuditEntry::new(
                account.to_string(),
                Action::Login.as_str(),
                account.to_string(),
                Outcome::Success,
            )
            .with_details(json!({ "source": source }));
            self.audit(repo, &entry)?;
            Ok(row.expires_at)
        })?;
        Ok(LoginOutcome {
            token,
            csrf_token,
            principal,
            expires_at,
        })
    }

    /// Resolves a bearer token. Unknown, expired and revoked tokens all
    /// produce the same [`Error::InvalidSession`].
    pub fn authenticate(&self, token: &str) -> Result<Authenticated> {
        let token_digest = digest(token);
        let policy = self.config().session;
        let row = self.read(|repo| {
            let row = repo
                .get_session(&token_digest)?
                .ok_or(Error::InvalidSession)?;
            if !policy.is_live(&row, repo.now()) {
                return Err(Error::InvalidSession);
            }
            repo.touch_session(&token_digest, policy.expiry_from(repo.now()))?;
            Ok(row)
        })?;
        let principal = match self.principal_for(row.principal) {
            Ok(p) => p,
            Err(Error::NotFound) => return Err(Error::InvalidSession),
            Err(e) => return Err(e),
        };
        Ok(Authenticated {
            principal,
            csrf_token: row.csrf_token,
            token_digest,
        })
    }

    /// Constant-time check of the presented anti-forgery token.
    pub fn check_csrf(&self, session: &Authenticated, presented: Option<&str>) -> Result<()> {
        if self.config().weaknesses.contains(Weakness::Csrf) {
            return Ok(());
        }
        match presented {
            Some(value) if ct_eq(value, &session.csrf_token) => Ok(()),
            _ => Err(Error::CsrfMismatch),
        }
    }

    /// The anti-forgery token bound to this session.
    pub fn issue_csrf(&self, session: &Authenticated) -> String {
        session.csrf_token.clone()
    }

    pub fn logout(&self, session: &Authenticated) -> Result<()> {
        self.tx(|repo| {
            repo.revoke_session(&session.token_digest)?;
            let actor = session.principal.actor();
            let entry = AuditEntry::new(
                actor.clone(),
                Action::Logout.as_str(),
                actor,
                Outcome::Success,
            );
            Ok(self.audit(repo, &entry)?)
        })
    }

    /// Builds the principal from the current account row.
    pub fn principal_for(&self, account: AccountRef) -> Result<Principal> {
        self.read(|repo| {
            let (role, department, pending_completion) = match account.kind {
                AccountKind::Admin => {
                    repo.get_admin(account.id)?;
                    (Role::Admin, None, false)
                }
                AccountKind::Staff => {
                    let staff = repo.get_staff(account.id)?;
                    match staff.designation {
                        Some(d) => (Role::from(d), Some(staff.department), false),
                        None => (Role::Lecturer, Some(staff.department), true),
                    }
                }
                AccountKind::Cadet => (
                    Role::Cadet,
                    Some(repo.get_cadet(account.id)?.department),
                    false,
                ),
            };
            Ok(Principal {
                account,
                role,
                department,
                pending_completion,
            })
        })
    }

    /// Always succeeds, whether or not the account exists, so the response
    /// reveals nothing. When it does exist a single-use token is recorded
    /// and its delivery is written, sealed, to the audit trail.
    pub fn begin_password_reset(&self, kind: AccountKind, email: &str) -> Result<()> {
        let found = match validate_email(email) {
            Ok(normalized) => self.read(|repo| Ok(repo.find_credentials(kind, &normalized)?))?,
            Err(_) => None,
        };
        let token = random_token();
        self.tx(|repo| {
            let Some((id, _)) = found else {
                let entry = AuditEntry::new(
                    ANONYMOUS,
                    Action::BeginPasswordReset.as_str(),
                    "unknown",
                    Outcome::Failure,
                )
                .with_details(json!({ "kind": kind.as_str() }));
                return Ok(self.audit(repo, &entry)?);
            };
            let account = AccountRef { kind, id };
            repo.insert_reset_token(&ResetRow {
                token_digest: digest(&token),
                principal: account,
                expires_at: repo.now() + self.config().reset_token_ttl,
                used: false,
            })?;
            let sealed = SealedBlob::seal(
                &self.config().encryption_key,
                token.as_bytes(),
                RESET_DELIVERY_CONTEXT,
            );
            let entry = AuditEntry::new(
                ANONYMOUS,
                Action::BeginPasswordReset.as_str(),
                account.to_string(),
                Outcome::Success,
            )
            .with_details(json!({ "delivery": hex(&sealed.to_bytes()) }));
            Ok(self.audit(repo, &entry)?)
        })
    }

    /// Recovers the reset token from a delivery audit record.
    pub fn open_reset_delivery(&self, record: &AuditRecord) -> Result<String> {
        open_delivery(&self.config().encryption_key, record)
    }

    pub fn complete_password_reset(&self, token: &str, new_password: &str) -> Result<()> {
        check_strength(new_password)?;
        let hash = self.hasher().hash(new_password)?;
        self.tx(|repo| {
            let account = repo
                .consume_reset_token(&digest(token))?
                .ok_or(Error::InvalidResetToken)?;
            repo.set_password_hash(account.kind, account.id, &hash)?;
            repo.revoke_sessions_of(account, None)?;
            let entry = AuditEntry::new(
                account.to_string(),
                Action::CompletePasswordReset.as_str(),
                account.to_string(),
                Outcome::Success,
            );
            Ok(self.audit(repo, &entry)?)
        })
    }

    /// Replaces the caller's password after re-verifying the current one.
    /// Every other session of the caller is revoked.
    pub fn change_own_password(
        &self,
        session: &Authenticated,
        current: &str,
        new_password: &str,
    ) -> Result<()> {
        let principal = &session.principal;
        self.authorize(
            principal,
            Action::ChangeOwnPassword,
            &crate::access::Resource::Any,
        )?;
        check_strength(new_password)?;
        let account = principal.account;
        let stored = self.read(|repo| Ok(repo.password_hash(account.kind, account.id)?))?;
        if !self.hasher().verify(current, &stored).unwrap_or(false) {
            return Err(Error::InvalidCredentials);
        }
        let hash = self.hasher().hash(new_password)?;
        self.tx(|repo| {
            repo.set_password_hash(account.kind, account.id, &hash)?;
            repo.revoke_sessions_of(account, Some(&session.token_digest))?;
            let entry = AuditEntry::new(
                principal.actor(),
                Action::ChangeOwnPassword.as_str(),
                principal.actor(),
                Outcome::Success,
            );
            Ok(self.audit(repo, &entry)?)
        })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn unhex(text: &str) -> Option<Vec<u8>> {
    if !text.len().is_multiple_of(2) {
        return None;
    }
    (0..text.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(text.get(i..i + 2)?, 16).ok())
        .collect()
}

fn open_delivery(key: &EncryptionKey, record: &AuditRecord) -> Result<String> {
    let sealed = record
        .details
        .get("delivery")
        .and_then(|v| v.as_str())
        .and_then(unhex)
        .ok_or(Error::NotFound)?;
    let blob = SealedBlob::from_bytes(&sealed).map_err(|_| Error::IntegrityFailure)?;
    let plain = blob
        .open(key, RESET_DELIVERY_CONTEXT)
        .map_err(|_| Error::IntegrityFailure)?;
    String::from_utf8(plain).map_err(|_| Error::IntegrityFailure)
}
