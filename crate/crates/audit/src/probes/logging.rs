//! A10: security-relevant actions leave audit records.

use std::sync::Arc;

use serde_json::json;
use sims_core::store::{AuditRecord, Store};
use sims_core::SystemClock;

use crate::client::Request;
use crate::error::AuditError;
use crate::report::{Category, ProbeResult};

use super::Target;

/// An action the probe performs and the record it must leave.
pub struct Sentinel {
    pub name: &'static str,
    pub action: &'static str,
    pub actor: String,
    pub outcome: &'static str,
}

impl Sentinel {
    pub fn matches(&self, record: &AuditRecord) -> bool {
        record.action == self.action
            && record.actor == self.actor
            && record.outcome == self.outcome
            && !record.target.trim().is_empty()
    }
}

fn store_error(e: impl std::fmt::Display) -> AuditError {
    AuditError::Storage(e.to_string())
}

fn records_since(store: &Store, mark: i64) -> Result<Vec<AuditRecord>, AuditError> {
    store
        .read(|repo| repo.audit_since(mark, None))
        .map_err(store_error)
}

pub fn run(t: &Target<'_>) -> Result<Vec<ProbeResult>, AuditError> {
    let store = Store::open(&t.fixture.storage_path, Arc::new(SystemClock)).map_err(store_error)?;
    let mark = store.read(|repo| repo.audit_len()).map_err(store_error)?;

    let accounts = &t.fixture.accounts;
    let admin = t.login("admin", &accounts.admin, "admin")?;
    let cadet = t.login("cadet", &accounts.cadet, "cadet")?;
    t.client.send(Request::post(
        "/api/staff/login",
        json!({ "email": crate::templates::STRANGER_EMAIL, "password": "not-the-password" }),
    ))?;
    let department = t.login("staff", &accounts.hod, "hod")?.principal["department"]
        .as_str()
        .unwrap_or_default()
        .to_owned();
    t.client.send(
        Request::post(
            "/api/admin/staff-pins",
            json!({ "department": department, "count": 1 }),
        )
        .session(&admin),
    )?;
    t.client.send(
        Request::post(
            "/api/admin/events",
            json!({ "title": "Audit trail check", "body": "sentinel", "event_date": "2019-09-04" }),
        )
        .session(&admin),
    )?;
    t.client
        .send(Request::get("/api/admin/staff").session(&cadet))?;

    let sentinels = [
        Sentinel {
            name: "successful login recorded",
            action: "login",
            actor: admin.actor(),
            outcome: "success",
        },
        Sentinel {
            name: "failed login recorded",
            action: "login",
            actor: "anonymous".into(),
            outcome: "failure",
        },
        Sentinel {
            name: "pin generation recorded",
            action: "create_staff_pin",
            actor: admin.actor(),
            outcome: "success",
        },
        Sentinel {
            name: "event creation recorded",
            action: "create_event",
            actor: admin.actor(),
            outcome: "success",
        },
        Sentinel {
            name: "access denial recorded",
            action: "view_staff_list",
            actor: cadet.actor(),
            outcome: "denied",
        },
    ];
    let records = records_since(&store, mark)?;
    Ok(sentinels
        .iter()
        .map(|s| {
            let failures = if records.iter().any(|r| s.matches(r)) {
                vec![]
            } else {
                vec![format!(
                    "no {} record for {} with outcome {} among {} new records",
                    s.action,
                    s.actor,
                    s.outcome,
                    records.len()
                )]
            };
            ProbeResult::new(Category::A10, s.name, failures, 1)
        })
        .collect())
}
