//! The service facade. Every workflow is a method on [`Sims`]; the HTTP
//! server and the tests drive the same surface.

use std::sync::Arc;

use thiserror::Error;

use crate::access::{authorize_with, Action, Principal, Resource};
use crate::audit_log::{self, AuditEntry};
use crate::clock::Clock;
use crate::config::ServiceConfig;
use crate::error::{Error, Result};
use crate::security::{PasswordHasher, PolicyError};
use crate::store::{
    AppliedMigration, AuditRecord, NewAdmin, Outcome, Repo, Seed, Store, StoreError,
};

#[derive(Debug, Error)]
pub enum OpenError {
    #[error("cannot open storage: {0}")]
    Store(#[from] StoreError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("cannot create upload directory: {0}")]
    Io(#[from] std::io::Error),
}

/// Administrator created on first seed.
#[derive(Clone)]
pub struct AdminSeed {
    pub name: String,
    pub email: String,
    pub password: String,
}

impl std::fmt::Debug for AdminSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdminSeed")
            .field("name", &self.name)
            .field("email", &self.email)
            .finish_non_exhaustive()
    }
}

struct Inner {
    store: Store,
    config: ServiceConfig,
    hasher: PasswordHasher,
}

#[derive(Clone)]
pub struct Sims {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for Sims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Sims")
            .field("store", &self.inner.store)
            .finish_non_exhaustive()
    }
}

impl Sims {
    /// Opens storage without migrating it.
    pub fn open(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, OpenError> {
        std::fs::create_dir_all(&config.upload_dir)?;
        let hasher = PasswordHasher::new(config.hash_policy)?;
        let store = Store::open(&config.storage_path, clock)?;
        Ok(Self {
            inner: Arc::new(Inner {
                store,
                config,
                hasher,
            }),
        })
    }

    pub fn store(&self) -> &Store {
        &self.inner.store
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    pub fn hasher(&self) -> &PasswordHasher {
        &self.inner.hasher
    }

    pub fn migrate(&self) -> Result<Vec<AppliedMigration>> {
        Ok(self.store().migrate()?)
    }

    /// Seeds the demo institution and current session, plus `admin` when
    /// the store has no administrator yet.
    pub fn seed(&self, admin: Option<&AdminSeed>) -> Result<()> {
        let admin = match admin {
            Some(a) => Some(NewAdmin {
                name: crate::domain::required_text(&a.name, "name")?,
                email: crate::domain::validate_email(&a.email)?,
                password_hash: self.hasher().hash(&a.password)?,
            }),
            None => None,
        };
        Ok(self
            .store()
            .seed(&Seed::demo(self.config().session_year, admin))?)
    }

    /// Matrix and scope check. Denials are written to the audit trail.
    pub(crate) fn authorize(
        &self,
        principal: &Principal,
        action: Action,
        resource: &Resource,
    ) -> Result<()> {
        let verdict = authorize_with(principal, action, resource, &self.config().weaknesses);
        if verdict.is_err() {
            let entry = AuditEntry::new(
                principal.actor(),
                action.as_str(),
                format!("{resource:?}"),
                Outcome::Denied,
            );
            self.store().read(|repo| self.audit(repo, &entry))?;
        }
        verdict
    }

    /// Matrix-only check used by the transport before dispatch. Scope is
    /// checked again by the operation itself once the resource is known.
    pub fn authorize_route(&self, principal: &Principal, action: Action) -> Result<()> {
        self.authorize(principal, action, &Resource::Any)
    }

    pub(crate) fn audit(&self, repo: &Repo<'_>, entry: &AuditEntry) -> Result<(), StoreError> {
        audit_log::write(repo, &self.config().weaknesses, entry)
    }

    /// Audit records with `id > after`, oldest first.
    pub fn audit_records_since(
        &self,
        after: i64,
        action: Option<&str>,
    ) -> Result<Vec<AuditRecord>> {
        Ok(self.store().read(|repo| repo.audit_since(after, action))?)
    }

    pub fn audit_high_water_mark(&self) -> Result<i64> {
        Ok(self.store().read(|repo| repo.audit_len())?)
    }

    /// Runs `work` in a write transaction, mapping storage failures.
    pub(crate) fn tx<T>(&self, work: impl FnOnce(&Repo<'_>) -> Result<T>) -> Result<T> {
        self.store().within_transaction(work)
    }

    pub(crate) fn read<T>(&self, work: impl FnOnce(&Repo<'_>) -> Result<T>) -> Result<T> {
        self.store().read(work)
    }
}

impl From<OpenError> for Error {
    fn from(err: OpenError) -> Self {
        match err {
            OpenError::Store(e) => e.into(),
            other => Error::internal(other),
        }
    }
}
