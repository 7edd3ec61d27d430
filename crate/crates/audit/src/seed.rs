//! Provisions a fresh instance over HTTP with one account per role, a
//! course both cadets take and a recorded score, then writes the fixture.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::distributions::Alphanumeric;
use rand::Rng;
use serde_json::{json, Value};

use crate::client::{segment, Client, Exchange, Payload, Request, Session};
use crate::error::AuditError;
use crate::fixture::{Accounts, Credential, Fixture};

#[derive(Debug, Clone)]
pub struct SeedPlan {
    pub admin: Credential,
    pub storage_path: PathBuf,
    pub department: String,
    pub course_code: String,
    pub course_year: i32,
    pub cadet_npa: [String; 2],
    pub score: f64,
}

impl SeedPlan {
    pub fn new(admin: Credential, storage_path: PathBuf) -> Self {
        Self {
            admin,
            storage_path,
            department: "Sociology".into(),
            course_code: "SOC-103".into(),
            course_year: sims_core::config::DEFAULT_SESSION_YEAR,
            cadet_npa: ["NPA/04/09/00187".into(), "NPA/04/09/00188".into()],
            score: 68.0,
        }
    }
}

/// What the walkthrough observed along the way.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub fixture: Fixture,
    /// Course codes the first cadet was offered once registration opened.
    pub eligible: Vec<String>,
    /// The first cadet's result row for the seeded course.
    pub result: Value,
    pub elapsed: Duration,
}

fn password() -> String {
    let tail: String = rand::thread_rng()
        .sample_iter(&Alphanumeric)
        .take(20)
        .map(char::from)
        .collect();
    format!("seed-{tail}")
}

fn expect(step: &'static str, reply: Exchange, status: u16) -> Result<Value, AuditError> {
    if reply.status != status {
        return Err(AuditError::Seed {
            step,
            detail: reply.describe(),
        });
    }
    Ok(reply.json().unwrap_or(Value::Null))
}

fn login(
    client: &Client,
    step: &'static str,
    kind: &str,
    c: &Credential,
) -> Result<Session, AuditError> {
    client
        .login(kind, &c.email, &c.password)?
        .ok_or_else(|| AuditError::Seed {
            step,
            detail: format!("{} was refused", c.email),
        })
}

fn first_pin(step: &'static str, reply: Exchange) -> Result<String, AuditError> {
    let pins = expect(step, reply, 201)?;
    pins[0]["pin_code"]
        .as_str()
        .map(str::to_owned)
        .ok_or(AuditError::Seed {
            step,
            detail: "no pin_code in reply".into(),
        })
}

fn staff(
    client: &Client,
    admin: &Session,
    plan: &SeedPlan,
    designation: &str,
) -> Result<Credential, AuditError> {
    let pin = first_pin(
        "staff pin",
        client.send(
            Request::post(
                "/api/admin/staff-pins",
                json!({ "department": plan.department, "count": 1 }),
            )
            .session(admin),
        )?,
    )?;
    let credential = Credential {
        email: format!("{designation}.audit@nda.edu.ng"),
        password: password(),
    };
    expect(
        "staff registration",
        client.send(Request::post(
            "/api/staff/register",
            json!({
                "pin": pin, "sur_name": "Bello", "first_name": "Musa",
                "email": credential.email, "password": credential.password,
            }),
        ))?,
        201,
    )?;
    let session = login(client, "staff login", "staff", &credential)?;
    expect(
        "staff designation",
        client.send(
            Request::new(reqwest::Method::PATCH, "/api/me")
                .payload(Payload::Json(json!({ "designation": designation })))
                .session(&session),
        )?,
        200,
    )?;
    Ok(credential)
}

fn cadet(
    client: &Client,
    hod: &Session,
    npa: &str,
    ordinal: usize,
) -> Result<Credential, AuditError> {
    let pin = first_pin(
        "cadet pin",
        client.send(Request::post("/api/hod/cadet-pins", json!({ "count": 1 })).session(hod))?,
    )?;
    expect(
        "npa roster",
        client.send(
            Request::new(reqwest::Method::POST, "/api/hod/npa-roster")
                .payload(Payload::Text(format!("{npa}\n"), "text/plain"))
                .session(hod),
        )?,
        200,
    )?;
    let credential = Credential {
        email: format!("cadet{ordinal}.audit@nda.edu.ng"),
        password: password(),
    };
    expect(
        "cadet registration",
        client.send(Request::post(
            "/api/cadet/register",
            json!({
                "pin": pin, "npa_number": npa, "sur_name": "Okafor", "first_name": "Ada",
                "email": credential.email, "password": credential.password,
                "rc": 6, "level": 100, "semester": "first", "squad": 3, "sex": "F",
            }),
        ))?,
        201,
    )?;
    Ok(credential)
}

pub fn run(client: &Client, plan: &SeedPlan) -> Result<SeedOutcome, AuditError> {
    let started = Instant::now();
    client.check_reachable()?;
    let admin = login(client, "admin login", "admin", &plan.admin)?;
    let hod_credential = staff(client, &admin, plan, "hod")?;
    let lecturer_credential = staff(client, &admin, plan, "lecturer")?;
    let hod = login(client, "hod login", "staff", &hod_credential)?;
    let lecturer = login(client, "lecturer login", "staff", &lecturer_credential)?;
    let first = cadet(client, &hod, &plan.cadet_npa[0], 1)?;
    let second = cadet(client, &hod, &plan.cadet_npa[1], 2)?;

    expect(
        "course creation",
        client.send(
            Request::post(
                "/api/hod/courses",
                json!({
                    "course_code": plan.course_code, "course_title": "INTRODUCTION TO SOCIOLOGY",
                    "level": 100, "unit": 2, "semester": "first", "year": plan.course_year,
                }),
            )
            .session(&hod),
        )?,
        201,
    )?;
    expect(
        "course assignment",
        client.send(
            Request::post(
                "/api/hod/assignments",
                json!({ "course_code": plan.course_code, "staff_id": lecturer.account_id() }),
            )
            .session(&hod),
        )?,
        201,
    )?;
    expect(
        "registration window",
        client.send(
            Request::post("/api/hod/registration-window", json!({ "open": true })).session(&hod),
        )?,
        200,
    )?;

    let cadet_one = login(client, "cadet login", "cadet", &first)?;
    let cadet_two = login(client, "cadet login", "cadet", &second)?;
    let eligible = expect(
        "eligible courses",
        client.send(Request::get("/api/cadet/eligible-courses").session(&cadet_one))?,
        200,
    )?;
    let eligible: Vec<String> = eligible
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|c| c["course_code"].as_str().map(str::to_owned))
        .collect();
    for session in [&cadet_one, &cadet_two] {
        expect(
            "course registration",
            client.send(
                Request::post(
                    "/api/cadet/registrations",
                    json!({ "course_codes": [plan.course_code] }),
                )
                .session(session),
            )?,
            200,
        )?;
    }

    let code = segment(&plan.course_code);
    let scores = expect(
        "score upload",
        client.send(
            Request::new(
                reqwest::Method::POST,
                format!("/api/lecturer/courses/{code}/scores"),
            )
            .payload(Payload::Text(
                format!("npa_number,total\n{},{}\n", plan.cadet_npa[0], plan.score),
                "text/csv",
            ))
            .session(&lecturer),
        )?,
        200,
    )?;
    if scores["accepted"].as_array().map_or(0, Vec::len) != 1 {
        return Err(AuditError::Seed {
            step: "score upload",
            detail: scores.to_string(),
        });
    }
    expect(
        "material upload",
        client.send(
            Request::new(
                reqwest::Method::POST,
                format!("/api/lecturer/courses/{code}/materials"),
            )
            .payload(Payload::Multipart {
                filename: "soc103-week1.pdf".into(),
                bytes: b"%PDF-1.4\nweek one reading list\n".to_vec(),
            })
            .session(&lecturer),
        )?,
        201,
    )?;
    let results = expect(
        "results",
        client.send(Request::get("/api/cadet/results").session(&cadet_one))?,
        200,
    )?;
    let result = results
        .as_array()
        .and_then(|rows| {
            rows.iter()
                .find(|r| r["course_code"] == plan.course_code.as_str())
        })
        .cloned()
        .ok_or(AuditError::Seed {
            step: "results",
            detail: results.to_string(),
        })?;

    let fixture = Fixture {
        storage_path: plan.storage_path.clone(),
        accounts: Accounts {
            admin: plan.admin.clone(),
            hod: hod_credential,
            lecturer: lecturer_credential,
            cadet: first,
            second_cadet: second,
        },
        course_code: plan.course_code.clone(),
        throttle_limit: 5,
    };
    Ok(SeedOutcome {
        fixture,
        eligible,
        result,
        elapsed: started.elapsed(),
    })
}
