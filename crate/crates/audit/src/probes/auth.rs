//! A2: credential stuffing, session handling and request forgery.

use rand::distributions::Alphanumeric;
use rand::Rng;
use serde_json::json;
use sims_core::routes::ROUTES;

use crate::client::{Csrf, Request, Session};
use crate::error::AuditError;
use crate::report::{Category, ProbeResult};
use crate::templates::sample;

use super::{describe, Target};

/// Guessed session tokens tried per run.
pub const GUESSES: usize = 200;

fn random_text(len: usize) -> String {
    rand::thread_rng()
        .sample_iter(&Alphanumeric)
        .take(len)
        .map(char::from)
        .collect()
}

pub fn random_token() -> String {
    let bytes: [u8; 32] = rand::random();
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn stuffing(t: &Target<'_>) -> Result<ProbeResult, AuditError> {
    let email = format!("stuffing-{}@audit.invalid", random_text(12).to_lowercase());
    let limit = t.fixture.throttle_limit as usize;
    let mut failures = Vec::new();
    for attempt in 1..=limit + 1 {
        let reply = t.client.send(Request::post(
            "/api/staff/login",
            json!({ "email": email, "password": random_text(16) }),
        ))?;
        let expected = if attempt <= limit { 401 } else { 429 };
        if reply.status != expected {
            failures.push(format!(
                "attempt {attempt} answered {} not {expected}",
                reply.status
            ));
        }
    }
    Ok(ProbeResult::new(
        Category::A2,
        "credential stuffing throttled",
        failures,
        limit + 1,
    ))
}

fn me_status(t: &Target<'_>, token: &str) -> Result<u16, AuditError> {
    Ok(t.client.send(Request::get("/api/me").cookie(token))?.status)
}

fn admin_login(
    t: &Target<'_>,
    presented: Option<&str>,
) -> Result<crate::client::Exchange, AuditError> {
    let admin = &t.fixture.accounts.admin;
    let mut request = Request::post(
        "/api/admin/login",
        json!({ "email": admin.email, "password": admin.password }),
    );
    if let Some(token) = presented {
        request = request.cookie(token);
    }
    let reply = t.client.send(request)?;
    if reply.status != 200 {
        return Err(AuditError::FixtureInvalid(format!(
            "admin login answered {}",
            reply.status
        )));
    }
    Ok(reply)
}

fn fixation(t: &Target<'_>) -> Result<ProbeResult, AuditError> {
    let planted = random_token();
    let reply = admin_login(t, Some(&planted))?;
    let mut failures = Vec::new();
    if reply.session_cookie().as_deref() == Some(planted.as_str()) {
        failures.push("the login kept an attacker-chosen session id".into());
    }
    let status = me_status(t, &planted)?;
    if status != 401 {
        failures.push(format!("the planted id answered {status} after login"));
    }
    Ok(ProbeResult::new(
        Category::A2,
        "session fixation",
        failures,
        2,
    ))
}

fn rotation(t: &Target<'_>) -> Result<ProbeResult, AuditError> {
    let mut failures = Vec::new();
    let first = admin_login(t, None)?.session_cookie().unwrap_or_default();
    let second = admin_login(t, Some(&first))?
        .session_cookie()
        .unwrap_or_default();
    if first.is_empty() || second.is_empty() {
        failures.push("login set no session cookie".into());
    }
    if first == second {
        failures.push("a fresh login reused the presented session id".into());
    }
    let old = me_status(t, &first)?;
    if old != 401 {
        failures.push(format!("the replaced session still answered {old}"));
    }
    let new = me_status(t, &second)?;
    if new != 200 {
        failures.push(format!("the new session answered {new}"));
    }
    Ok(ProbeResult::new(
        Category::A2,
        "session rotation at login",
        failures,
        4,
    ))
}

fn cookie_flags(t: &Target<'_>) -> Result<ProbeResult, AuditError> {
    let reply = admin_login(t, None)?;
    let cookie = reply
        .header("set-cookie")
        .unwrap_or_default()
        .to_ascii_lowercase();
    let mut failures = Vec::new();
    for flag in ["httponly", "samesite=lax", "secure", "path=/"] {
        if !cookie.split(';').any(|part| part.trim() == flag) {
            failures.push(format!("session cookie lacks {flag}"));
        }
    }
    Ok(ProbeResult::new(
        Category::A2,
        "session cookie attributes",
        failures,
        4,
    ))
}

/// Every state-changing route with the token omitted and with a wrong one.
/// Logout goes last so the sweep keeps its session throughout.
fn forgery(t: &Target<'_>) -> Result<ProbeResult, AuditError> {
    let sessions = t.sessions()?;
    let ctx = t.context(&sessions)?;
    let session: Session = t.login("admin", &t.fixture.accounts.admin, "admin")?;
    let mut routes: Vec<_> = ROUTES.iter().filter(|r| r.requires_csrf()).collect();
    routes.sort_by_key(|r| r.path == "/api/logout");
    let mut failures = Vec::new();
    let mut checked = 0;
    for route in routes {
        let Some(s) = sample(route, Some(sims_core::domain::Role::Admin), &ctx) else {
            continue;
        };
        for mode in [Csrf::Omit, Csrf::Wrong] {
            let reply = t.client.send(s.request().session(&session).csrf(mode))?;
            checked += 1;
            if reply.status != 403 || reply.error_code().as_deref() != Some("csrf_mismatch") {
                failures.push(format!(
                    "{} with {mode:?} token -> {}",
                    describe(route),
                    reply.describe()
                ));
            }
        }
    }
    Ok(ProbeResult::new(
        Category::A2,
        "forged state-changing requests",
        failures,
        checked,
    ))
}

fn guessing(t: &Target<'_>) -> Result<ProbeResult, AuditError> {
    let mut failures = Vec::new();
    for _ in 0..GUESSES {
        let token = random_token();
        let status = me_status(t, &token)?;
        if status != 401 {
            failures.push(format!("guessed token {token} answered {status}"));
        }
    }
    for junk in ["", "x", "../../etc/passwd", "' OR '1'='1"] {
        let status = me_status(t, &crate::client::segment(junk))?;
        if status != 401 {
            failures.push(format!("junk token {junk:?} answered {status}"));
        }
    }
    Ok(ProbeResult::new(
        Category::A2,
        "session token guessing",
        failures,
        GUESSES + 4,
    ))
}

pub fn run(t: &Target<'_>) -> Result<Vec<ProbeResult>, AuditError> {
    Ok(vec![
        stuffing(t)?,
        fixation(t)?,
        rotation(t)?,
        cookie_flags(t)?,
        forgery(t)?,
        guessing(t)?,
    ])
}
