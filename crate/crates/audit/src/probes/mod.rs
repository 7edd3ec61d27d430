//! Probe families, one module per OWASP category.

mod access;
mod auth;
mod exposure;
mod injection;
mod logging;
mod misconfig;
mod xss;

use sims_core::access::permits;
use sims_core::domain::Role;
use sims_core::routes::{Route, ROUTES};

use crate::client::{Client, Exchange, Request, Session};
use crate::error::AuditError;
use crate::fixture::{Credential, Fixture};
use crate::report::{by_design, AuditReport, Category, NotApplicable, ProbeResult};
use crate::templates::{sample, Context, Sample, ROLES};

/// The run order. Sensitive data exposure goes last so it can scan every
/// response the other families provoked.
pub const ORDER: [Category; 7] = [
    Category::A1,
    Category::A2,
    Category::A5,
    Category::A6,
    Category::A7,
    Category::A10,
    Category::A3,
];

/// Everything a probe family needs.
pub struct Target<'a> {
    pub client: &'a Client,
    pub fixture: &'a Fixture,
}

/// One logged-in session per fixture account.
pub struct Sessions {
    pub admin: Session,
    pub hod: Session,
    pub lecturer: Session,
    pub cadet: Session,
    pub second_cadet: Session,
}

impl Sessions {
    pub fn for_role(&self, role: Role) -> &Session {
        match role {
            Role::Admin => &self.admin,
            Role::Hod => &self.hod,
            Role::Lecturer => &self.lecturer,
            Role::Cadet => &self.cadet,
        }
    }
}

impl Target<'_> {
    pub fn login(
        &self,
        kind: &str,
        credential: &Credential,
        label: &str,
    ) -> Result<Session, AuditError> {
        self.client
            .login(kind, &credential.email, &credential.password)?
            .ok_or_else(|| {
                AuditError::FixtureInvalid(format!("the target refused the {label} credentials"))
            })
    }

    pub fn sessions(&self) -> Result<Sessions, AuditError> {
        let a = &self.fixture.accounts;
        Ok(Sessions {
            admin: self.login("admin", &a.admin, "admin")?,
            hod: self.login("staff", &a.hod, "hod")?,
            lecturer: self.login("staff", &a.lecturer, "lecturer")?,
            cadet: self.login("cadet", &a.cadet, "cadet")?,
            second_cadet: self.login("cadet", &a.second_cadet, "second cadet")?,
        })
    }

    /// Identifiers for the samples, read from the live target.
    pub fn context(&self, sessions: &Sessions) -> Result<Context, AuditError> {
        let department = sessions.hod.principal["department"]
            .as_str()
            .ok_or_else(|| AuditError::FixtureInvalid("the hod account has no department".into()))?
            .to_owned();
        let id = |s: &Session, label: &str| {
            s.account_id()
                .ok_or_else(|| AuditError::FixtureInvalid(format!("no account id for the {label}")))
        };
        let materials = self
            .client
            .send(Request::get("/api/cadet/materials").session(&sessions.cadet))?;
        let material_id = materials
            .json()
            .and_then(|v| {
                v.as_array()
                    .and_then(|a| a.first())
                    .and_then(|m| m["id"].as_i64())
            })
            .unwrap_or(1);
        Ok(Context {
            course_code: self.fixture.course_code.clone(),
            department,
            lecturer_id: id(&sessions.lecturer, "lecturer")?,
            cadet_id: id(&sessions.cadet, "cadet")?,
            material_id,
        })
    }

    /// Sends `sample` as `role`, or anonymously when `role` is `None`.
    pub fn send_sample(
        &self,
        sample: &Sample,
        session: Option<&Session>,
    ) -> Result<Exchange, AuditError> {
        let mut request = sample.request();
        if let Some(s) = session {
            request = request.session(s);
        }
        self.client.send(request)
    }
}

/// The first role the matrix lets call `route`, or `None` for public routes.
pub fn caller_for(route: &Route) -> Option<Role> {
    if !route.requires_session() {
        return None;
    }
    ROLES.into_iter().find(|r| permits(*r, route.action))
}

/// Every GET route with its sample as seen by `role`.
pub fn readable(role: Role, ctx: &Context) -> Vec<Sample> {
    ROUTES
        .iter()
        .filter(|r| {
            r.method == sims_core::routes::Method::Get
                && r.requires_session()
                && permits(role, r.action)
        })
        .filter_map(|r| sample(r, Some(role), ctx))
        .collect()
}

pub fn describe(route: &Route) -> String {
    format!("{} {}", route.method.as_str(), route.path)
}

/// Runs the requested families against `client` and assembles the report.
pub fn run(
    client: &Client,
    fixture: &Fixture,
    categories: &[Category],
) -> Result<AuditReport, AuditError> {
    let started_at = chrono::Utc::now();
    client.check_reachable()?;
    let target = Target { client, fixture };
    let mut probes: Vec<ProbeResult> = Vec::new();
    for category in ORDER.into_iter().filter(|c| categories.contains(c)) {
        let results = match category {
            Category::A1 => injection::run(&target)?,
            Category::A2 => auth::run(&target)?,
            Category::A3 => exposure::run(&target)?,
            Category::A5 => access::run(&target)?,
            Category::A6 => misconfig::run(&target)?,
            Category::A7 => xss::run(&target)?,
            Category::A10 => logging::run(&target)?,
            _ => unreachable!("ORDER holds probed categories only"),
        };
        probes.extend(results);
    }
    let not_applicable: Vec<NotApplicable> = by_design()
        .into_iter()
        .filter(|na| categories.contains(&na.category))
        .collect();
    Ok(AuditReport::new(
        client.base(),
        started_at,
        probes,
        not_applicable,
    ))
}
