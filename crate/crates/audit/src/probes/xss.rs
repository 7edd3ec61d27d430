//! A7: stored and reflected markup.

use serde_json::json;

use crate::client::{Exchange, Payload, Request};
use crate::error::AuditError;
use crate::report::{Category, ProbeResult};
use crate::templates::ROLES;

use super::{readable, Target};

pub const MARKUP: &str = "<script>alert(1)</script>";

pub fn renders_markup(reply: &Exchange) -> Option<String> {
    let media = reply
        .header("content-type")
        .unwrap_or_default()
        .to_ascii_lowercase();
    if media.starts_with("text/html") {
        return Some(format!("served as {media}"));
    }
    if reply.text().contains(MARKUP) {
        return Some("echoed the raw payload".into());
    }
    None
}

pub fn run(t: &Target<'_>) -> Result<Vec<ProbeResult>, AuditError> {
    let sessions = t.sessions()?;
    let ctx = t.context(&sessions)?;
    // Refusing the payload outright is also a defence, so a refused plant
    // only shrinks what the rendering check below can observe.
    let mut planted = 0;
    let mut plant = |_label: &str, reply: Exchange| {
        if (200..300).contains(&reply.status) {
            planted += 1;
        }
    };
    let patch_me = |field: &str| {
        Request::new(reqwest::Method::PATCH, "/api/me")
            .payload(Payload::Json(json!({ field: MARKUP })))
    };
    plant(
        "admin name",
        t.client.send(patch_me("name").session(&sessions.admin))?,
    );
    for (label, s) in [
        ("hod", &sessions.hod),
        ("lecturer", &sessions.lecturer),
        ("cadet", &sessions.cadet),
    ] {
        plant(label, t.client.send(patch_me("sur_name").session(s))?);
    }
    plant(
        "event",
        t.client.send(
            Request::post(
                "/api/admin/events",
                json!({ "title": MARKUP, "body": MARKUP, "event_date": "2019-09-03" }),
            )
            .session(&sessions.admin),
        )?,
    );
    plant(
        "staff record",
        t.client.send(
            Request::post(
                "/api/admin/staff",
                json!({ "id": ctx.lecturer_id, "sur_name": MARKUP }),
            )
            .session(&sessions.admin),
        )?,
    );
    plant(
        "cadet record",
        t.client.send(
            Request::post(
                "/api/hod/cadets",
                json!({ "id": sessions.second_cadet.account_id(), "sur_name": MARKUP }),
            )
            .session(&sessions.hod),
        )?,
    );
    plant(
        "course title",
        t.client.send(
            Request::new(
                reqwest::Method::PATCH,
                format!(
                    "/api/hod/courses/{}",
                    crate::client::segment(&ctx.course_code)
                ),
            )
            .payload(Payload::Json(json!({ "course_title": MARKUP })))
            .session(&sessions.hod),
        )?,
    );
    plant(
        "material filename",
        t.client.send(
            Request::new(
                reqwest::Method::POST,
                format!(
                    "/api/lecturer/courses/{}/materials",
                    crate::client::segment(&ctx.course_code)
                ),
            )
            .payload(Payload::Multipart {
                filename: format!("{MARKUP}.pdf"),
                bytes: b"%PDF-1.4\nmarkup probe\n".to_vec(),
            })
            .session(&sessions.lecturer),
        )?,
    );

    let start = t.client.transcript_len();
    for role in ROLES {
        for s in readable(role, &ctx) {
            t.send_sample(&s, Some(sessions.for_role(role)))?;
        }
    }
    let reflected = [
        Request::get(format!("/api/{}", crate::client::segment(MARKUP))),
        Request::post(
            "/api/staff/login",
            json!({ "email": MARKUP, "password": MARKUP }),
        ),
        Request::new(reqwest::Method::PATCH, "/api/me")
            .payload(Payload::Json(json!({ MARKUP: MARKUP })))
            .session(&sessions.cadet),
    ];
    for request in reflected {
        t.client.send(request)?;
    }
    let mut rendered = Vec::new();
    let replies = t.client.transcript_since(start);
    for reply in &replies {
        if let Some(why) = renders_markup(reply) {
            rendered.push(format!("{} {} {why}", reply.method, reply.path));
        }
    }
    let mut result = ProbeResult::new(
        Category::A7,
        "stored and reflected markup",
        rendered,
        replies.len(),
    );
    result.evidence = format!("{planted} of 9 payloads stored; {}", result.evidence);
    Ok(vec![result])
}
