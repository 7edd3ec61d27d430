//! A6: response hardening and error handling.

use crate::client::{Exchange, Payload, Request};
use crate::error::AuditError;
use crate::report::{Category, ProbeResult};
use crate::templates::ROLES;

use super::{readable, Target};

/// Substrings that betray internals when they appear in an error body.
pub const LEAK_MARKERS: [&str; 8] = [
    "sqlite",
    "select ",
    "insert into",
    ".rs:",
    "panicked",
    "backtrace",
    "/root/",
    "src/",
];

pub fn header_gaps(reply: &Exchange) -> Vec<String> {
    let mut gaps = Vec::new();
    let expect = |name: &str, value: &str, gaps: &mut Vec<String>| {
        if !reply
            .header(name)
            .is_some_and(|v| v.eq_ignore_ascii_case(value))
        {
            gaps.push(format!("{name} is {:?}", reply.header(name)));
        }
    };
    expect("x-content-type-options", "nosniff", &mut gaps);
    expect("x-frame-options", "DENY", &mut gaps);
    if !reply
        .header("content-security-policy")
        .is_some_and(|v| v.contains("default-src"))
    {
        gaps.push("no content-security-policy".into());
    }
    let media = reply
        .header("content-type")
        .unwrap_or_default()
        .to_ascii_lowercase();
    if media == "application/octet-stream" {
        if !reply
            .header("content-disposition")
            .is_some_and(|v| v.starts_with("attachment"))
        {
            gaps.push("binary response is not an attachment".into());
        }
    } else if media != "application/json; charset=utf-8" {
        gaps.push(format!("content-type is {media:?}"));
    }
    gaps
}

pub fn leak_in(reply: &Exchange) -> Option<&'static str> {
    if reply.status < 400 {
        return None;
    }
    let body = reply.text().to_ascii_lowercase();
    LEAK_MARKERS.into_iter().find(|m| body.contains(m))
}

pub fn run(t: &Target<'_>) -> Result<Vec<ProbeResult>, AuditError> {
    let start = t.client.transcript_len();
    let sessions = t.sessions()?;
    let ctx = t.context(&sessions)?;
    for role in ROLES {
        for s in readable(role, &ctx) {
            t.send_sample(&s, Some(sessions.for_role(role)))?;
        }
    }

    let mut handling = Vec::new();
    let admin = &sessions.admin;
    let cases: Vec<(&str, Request<'_>, u16)> = vec![
        (
            "malformed json",
            Request::new(reqwest::Method::POST, "/api/admin/login").payload(Payload::Raw(
                b"{\"email\":".to_vec(),
                "application/json".into(),
            )),
            400,
        ),
        (
            "wrong media type",
            Request::new(reqwest::Method::POST, "/api/admin/login").payload(Payload::Text(
                "email=a&password=b".into(),
                "application/x-www-form-urlencoded",
            )),
            415,
        ),
        (
            "mistyped field",
            Request::new(reqwest::Method::POST, "/api/admin/events")
                .session(admin)
                .payload(Payload::Json(
                    serde_json::json!({ "title": 7, "body": [], "event_date": "x" }),
                )),
            422,
        ),
        (
            "unknown route",
            Request::get("/api/admin/secrets").session(admin),
            404,
        ),
        (
            "wrong method",
            Request::new(reqwest::Method::DELETE, "/api/events").session(admin),
            405,
        ),
        (
            "non-numeric id",
            Request::get("/api/cadet/materials/abc").session(&sessions.cadet),
            404,
        ),
    ];
    let count = cases.len();
    for (label, request, expected) in cases {
        let reply = t.client.send(request)?;
        if reply.status != expected || reply.error_code().is_none() {
            handling.push(format!("{label} -> {}", reply.describe()));
        }
    }

    let mut headers = Vec::new();
    let captured = t.client.transcript_since(start);
    for reply in &captured {
        let gaps = header_gaps(reply);
        if !gaps.is_empty() {
            headers.push(format!(
                "{} {}: {}",
                reply.method,
                reply.path,
                gaps.join(", ")
            ));
        }
    }
    let mut disclosure = Vec::new();
    let everything = t.client.transcript();
    for reply in &everything {
        if let Some(marker) = leak_in(reply) {
            disclosure.push(format!(
                "{} {} -> {} mentions {marker:?}",
                reply.method, reply.path, reply.status
            ));
        }
    }
    Ok(vec![
        ProbeResult::new(Category::A6, "hardening headers", headers, captured.len()),
        ProbeResult::new(Category::A6, "uniform error replies", handling, count),
        ProbeResult::new(
            Category::A6,
            "no internals in errors",
            disclosure,
            everything.len(),
        ),
    ])
}
