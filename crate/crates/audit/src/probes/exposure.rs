//! A3: no secret leaves the service or rests unprotected.

use std::path::PathBuf;

use crate::client::{Exchange, Request};
use crate::error::AuditError;
use crate::report::{Category, ProbeResult};
use crate::templates::ROLES;

use super::{readable, Target};

pub fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

fn exchange_bytes(reply: &Exchange) -> Vec<u8> {
    let mut bytes = reply.body.clone();
    for (name, value) in &reply.headers {
        bytes.extend_from_slice(name.as_str().as_bytes());
        bytes.extend_from_slice(value.as_bytes());
    }
    bytes
}

/// The storage file and the journal files next to it.
pub fn storage_files(path: &std::path::Path) -> Vec<PathBuf> {
    let mut out = vec![path.to_path_buf()];
    for suffix in ["-wal", "-shm", "-journal"] {
        let mut name = path.as_os_str().to_owned();
        name.push(suffix);
        out.push(PathBuf::from(name));
    }
    out
}

pub fn run(t: &Target<'_>) -> Result<Vec<ProbeResult>, AuditError> {
    let sessions = t.sessions()?;
    let ctx = t.context(&sessions)?;
    for role in ROLES {
        for s in readable(role, &ctx) {
            t.send_sample(&s, Some(sessions.for_role(role)))?;
        }
    }
    // Real passwords at the wrong login endpoint, so any record of a failed
    // attempt that captured the password would surface in storage.
    for (kind, credential) in t.fixture.accounts.all() {
        let other = if kind == "cadet" { "staff" } else { "cadet" };
        t.client.send(Request::post(
            format!("/api/{other}/login"),
            serde_json::json!({ "email": credential.email, "password": credential.password }),
        ))?;
    }

    let secrets: Vec<(&str, &str)> = ["admin", "hod", "lecturer", "cadet", "second cadet"]
        .into_iter()
        .zip(t.fixture.passwords())
        .collect();
    let replies = t.client.transcript();
    let mut in_transit = Vec::new();
    for reply in &replies {
        let bytes = exchange_bytes(reply);
        for (owner, password) in &secrets {
            if contains(&bytes, password.as_bytes()) {
                in_transit.push(format!(
                    "{owner} password in {} {}",
                    reply.method, reply.path
                ));
            }
        }
    }
    let mut at_rest = Vec::new();
    let mut scanned = 0;
    for file in storage_files(&t.fixture.storage_path) {
        let Ok(bytes) = std::fs::read(&file) else {
            continue;
        };
        scanned += 1;
        for (owner, password) in &secrets {
            if contains(&bytes, password.as_bytes()) {
                at_rest.push(format!("{owner} password in {}", file.display()));
            }
        }
    }
    Ok(vec![
        ProbeResult::new(
            Category::A3,
            "no passwords in responses",
            in_transit,
            replies.len(),
        ),
        ProbeResult::new(
            Category::A3,
            "no plaintext passwords at rest",
            at_rest,
            scanned,
        ),
    ])
}
