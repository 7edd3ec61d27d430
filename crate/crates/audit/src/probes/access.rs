//! A5: vertical and horizontal access control.

use sims_core::access::permits;
use sims_core::routes::ROUTES;

use crate::client::Request;
use crate::error::AuditError;
use crate::report::{Category, ProbeResult};
use crate::templates::{sample, ROLES};

use super::{describe, Target};

pub fn run(t: &Target<'_>) -> Result<Vec<ProbeResult>, AuditError> {
    let sessions = t.sessions()?;
    let ctx = t.context(&sessions)?;

    let mut vertical = Vec::new();
    let mut anonymous = Vec::new();
    let mut checked = 0;
    let mut anonymous_checked = 0;
    for route in ROUTES.iter().filter(|r| r.requires_session()) {
        for role in ROLES.into_iter().filter(|r| !permits(*r, route.action)) {
            let Some(s) = sample(route, Some(role), &ctx) else {
                continue;
            };
            let reply = t.send_sample(&s, Some(sessions.for_role(role)))?;
            checked += 1;
            if reply.status != 403 {
                vertical.push(format!(
                    "{role} reached {} -> {}",
                    describe(route),
                    reply.describe()
                ));
            }
        }
        if let Some(s) = sample(route, None, &ctx) {
            let reply = t.send_sample(&s, None)?;
            anonymous_checked += 1;
            if reply.status != 401 {
                anonymous.push(format!(
                    "anonymous {} -> {}",
                    describe(route),
                    reply.describe()
                ));
            }
        }
    }

    let mut horizontal = Vec::new();
    let own = sessions.cadet.account_id().unwrap_or(-1);
    let other = sessions.second_cadet.account_id().unwrap_or(-1);
    let peek = t.client.send(
        Request::get(format!("/api/cadet/results?cadet_id={other}")).session(&sessions.cadet),
    )?;
    if peek.status != 403 {
        horizontal.push(format!(
            "cadet {own} read the results of cadet {other} -> {}",
            peek.status
        ));
    }
    let mine = t
        .client
        .send(Request::get("/api/cadet/results").session(&sessions.cadet))?;
    let rows = mine
        .json()
        .and_then(|v| v.as_array().cloned())
        .unwrap_or_default();
    if mine.status != 200 {
        horizontal.push(format!("own results answered {}", mine.status));
    }
    if let Some(row) = rows
        .iter()
        .find(|row| row["cadet_id"].as_i64() != Some(own))
    {
        horizontal.push(format!(
            "own results contained a row of cadet {}",
            row["cadet_id"]
        ));
    }

    Ok(vec![
        ProbeResult::new(Category::A5, "roles outside the matrix", vertical, checked),
        ProbeResult::new(
            Category::A5,
            "requests without a session",
            anonymous,
            anonymous_checked,
        ),
        ProbeResult::new(Category::A5, "one cadet reading another", horizontal, 3),
    ])
}
