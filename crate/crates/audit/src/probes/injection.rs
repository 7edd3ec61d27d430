//! A1: SQL and command-style injection into every text input.

use serde_json::{json, Value};
use sims_core::routes::ROUTES;

use crate::client::Request;
use crate::error::AuditError;
use crate::report::{Category, ProbeResult};
use crate::templates::{sample, Sample, SampleBody};

use super::{caller_for, describe, Target};

pub const PAYLOADS: [&str; 5] = [
    "' OR '1'='1",
    "'; DROP TABLE staff;--",
    "\"; DROP TABLE staff;--",
    "'",
    "audit\u{0}probe",
];

/// Where in a request a payload was placed.
#[derive(Debug, Clone)]
pub enum Site {
    JsonLeaf(Vec<String>),
    Param(usize),
    TextBody,
    Filename,
    Query,
}

/// Paths to every string leaf of `value`.
pub fn string_leaves(value: &Value) -> Vec<Vec<String>> {
    fn walk(value: &Value, prefix: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        match value {
            Value::String(_) => out.push(prefix.clone()),
            Value::Object(map) => {
                for (k, v) in map {
                    prefix.push(k.clone());
                    walk(v, prefix, out);
                    prefix.pop();
                }
            }
            Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    prefix.push(i.to_string());
                    walk(v, prefix, out);
                    prefix.pop();
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(value, &mut Vec::new(), &mut out);
    out
}

fn set_leaf(value: &mut Value, path: &[String], payload: &str) {
    let mut slot = value;
    for key in path {
        slot = match slot {
            Value::Object(map) => map.get_mut(key).expect("leaf path exists"),
            Value::Array(items) => &mut items[key.parse::<usize>().expect("array index")],
            _ => unreachable!("leaf paths only traverse containers"),
        };
    }
    *slot = Value::String(payload.to_owned());
}

pub fn sites(sample: &Sample) -> Vec<Site> {
    let mut out: Vec<Site> = (0..sample.params.len()).map(Site::Param).collect();
    match &sample.body {
        SampleBody::Json(v) => out.extend(string_leaves(v).into_iter().map(Site::JsonLeaf)),
        SampleBody::Text(..) => out.push(Site::TextBody),
        SampleBody::Multipart { .. } => out.push(Site::Filename),
        SampleBody::None => {}
    }
    if sample.query_key.is_some() {
        out.push(Site::Query);
    }
    out
}

/// `sample` with `payload` at `site`, or `None` when the payload cannot be
/// carried there at all.
pub fn inject(sample: &Sample, site: &Site, payload: &str) -> Option<Sample> {
    let mut s = sample.clone();
    match site {
        Site::JsonLeaf(path) => {
            if let SampleBody::Json(v) = &mut s.body {
                set_leaf(v, path, payload);
            }
        }
        Site::Param(i) => s.params[*i].1 = payload.to_owned(),
        Site::TextBody => {
            if let SampleBody::Text(text, media) = &mut s.body {
                *text = if *media == "text/csv" {
                    format!("npa_number,total\n{payload},50\n")
                } else {
                    format!("{payload}\n")
                };
            }
        }
        Site::Filename => {
            // Header values cannot carry control characters.
            if payload.chars().any(char::is_control) {
                return None;
            }
            if let SampleBody::Multipart { filename, .. } = &mut s.body {
                *filename = format!("{payload}.pdf");
            }
        }
        Site::Query => s.query = Some(payload.to_owned()),
    }
    Some(s)
}

fn is_entry_point(path: &str) -> bool {
    path.ends_with("/login") || path.ends_with("/register")
}

pub fn run(t: &Target<'_>) -> Result<Vec<ProbeResult>, AuditError> {
    let sessions = t.sessions()?;
    let ctx = t.context(&sessions)?;
    let staff_before = count(t, &sessions.admin, "/api/admin/staff")?;

    let mut failures = Vec::new();
    let mut checked = 0;
    for route in ROUTES {
        let role = caller_for(route);
        let Some(base) = sample(route, role, &ctx) else {
            continue;
        };
        let session = role.map(|r| sessions.for_role(r));
        for site in sites(&base) {
            for payload in PAYLOADS {
                let Some(probe) = inject(&base, &site, payload) else {
                    continue;
                };
                let reply = t.send_sample(&probe, session)?;
                checked += 1;
                if reply.status >= 500 {
                    failures.push(format!(
                        "{} at {site:?} with {payload:?} -> {}",
                        describe(route),
                        reply.status
                    ));
                } else if is_entry_point(route.path) && (200..300).contains(&reply.status) {
                    failures.push(format!(
                        "{} accepted {payload:?} at {site:?}",
                        describe(route)
                    ));
                }
            }
        }
    }
    let sweep = ProbeResult::new(
        Category::A1,
        "injection into every input",
        failures,
        checked,
    );

    let admin = &t.fixture.accounts.admin;
    let mut bypass = Vec::new();
    for kind in ["admin", "staff", "cadet"] {
        let reply = t.client.send(Request::post(
            format!("/api/{kind}/login"),
            json!({ "email": PAYLOADS[0], "password": admin.password }),
        ))?;
        if reply.status == 200 {
            bypass.push(format!(
                "/api/{kind}/login granted a session for a tautology email"
            ));
        }
    }
    let bypass = ProbeResult::new(Category::A1, "login bypass by tautology", bypass, 3);

    let mut intact = Vec::new();
    for (kind, credential) in t.fixture.accounts.all() {
        if t.client
            .login(kind, &credential.email, &credential.password)?
            .is_none()
        {
            intact.push(format!("{} can no longer log in", credential.email));
        }
    }
    let staff_after = count(t, &sessions.admin, "/api/admin/staff")?;
    if staff_after != staff_before {
        intact.push(format!(
            "staff list changed from {staff_before:?} to {staff_after:?} rows"
        ));
    }
    let courses = t
        .client
        .send(Request::get("/api/hod/courses").session(&sessions.hod))?;
    let has_course = courses
        .json()
        .and_then(|v| v.as_array().cloned())
        .is_some_and(|rows| {
            rows.iter()
                .any(|c| c["course_code"] == ctx.course_code.as_str())
        });
    if !has_course {
        intact.push(format!("course {} is gone", ctx.course_code));
    }
    let integrity = ProbeResult::new(Category::A1, "data intact after injection", intact, 7);
    Ok(vec![sweep, bypass, integrity])
}

fn count(
    t: &Target<'_>,
    session: &crate::client::Session,
    path: &str,
) -> Result<Option<usize>, AuditError> {
    let reply = t.client.send(Request::get(path).session(session))?;
    Ok(reply.json().and_then(|v| v.as_array().map(Vec::len)))
}
