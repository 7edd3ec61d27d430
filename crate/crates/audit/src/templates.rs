//! One sample request per route table row, used by every sweep.
//!
//! Samples are chosen so that replaying them against the fixture instance
//! is harmless: deletions and reassignment target records that do not
//! exist, logins use an email no fixture account owns, and the password
//! change presents a wrong current password.

use serde_json::{json, Value};
use sims_core::domain::Role;
use sims_core::routes::{Body, Method, Route};

use crate::client::{segment, Payload, Request};

/// Identifiers the samples refer to.
#[derive(Debug, Clone)]
pub struct Context {
    pub course_code: String,
    pub department: String,
    pub lecturer_id: i64,
    pub cadet_id: i64,
    pub material_id: i64,
}

/// An email no fixture account owns.
pub const STRANGER_EMAIL: &str = "nobody@audit.invalid";
/// A well-formed pin code that was never issued.
pub const UNKNOWN_PIN: &str = "00000000";
/// A course code that does not exist.
pub const UNKNOWN_COURSE: &str = "ZZZ-999";

#[derive(Debug, Clone)]
pub enum SampleBody {
    None,
    Json(Value),
    Text(String, &'static str),
    Multipart { filename: String, bytes: Vec<u8> },
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub route: &'static Route,
    /// Values for each `{param}` in the path template, unencoded.
    pub params: Vec<(String, String)>,
    pub body: SampleBody,
    /// Query parameter the route reads, if any.
    pub query_key: Option<&'static str>,
    pub query: Option<String>,
}

impl Sample {
    pub fn path(&self) -> String {
        let mut path = self.route.concrete(|name| {
            let value = self
                .params
                .iter()
                .find(|(k, _)| k == name)
                .map_or("", |(_, v)| v.as_str());
            segment(value)
        });
        if let (Some(key), Some(value)) = (self.query_key, &self.query) {
            path.push_str(&format!("?{key}={}", segment(value)));
        }
        path
    }

    pub fn payload(&self) -> Payload {
        match &self.body {
            SampleBody::None => Payload::None,
            SampleBody::Json(v) => Payload::Json(v.clone()),
            SampleBody::Text(t, media) => Payload::Text(t.clone(), media),
            SampleBody::Multipart { filename, bytes } => Payload::Multipart {
                filename: filename.clone(),
                bytes: bytes.clone(),
            },
        }
    }

    pub fn request<'a>(&self) -> Request<'a> {
        Request::new(http_method(self.route.method), self.path()).payload(self.payload())
    }
}

pub fn http_method(method: Method) -> reqwest::Method {
    match method {
        Method::Get => reqwest::Method::GET,
        Method::Post => reqwest::Method::POST,
        Method::Patch => reqwest::Method::PATCH,
        Method::Delete => reqwest::Method::DELETE,
    }
}

fn text(body: &str, media: &'static str) -> SampleBody {
    SampleBody::Text(body.to_owned(), media)
}

/// The sample for `route` as sent by `role`, or `None` when the route is
/// not known to this probe suite.
pub fn sample(route: &'static Route, role: Option<Role>, ctx: &Context) -> Option<Sample> {
    let mut params = Vec::new();
    let mut query_key = None;
    let mut param = |name: &str, value: String| params.push((name.to_owned(), value));
    let body = match (route.method, route.path) {
        (Method::Get, _) => {
            match route.path {
                "/api/lecturer/courses/{code}/cadets" => param("code", ctx.course_code.clone()),
                "/api/cadet/materials/{id}" => param("id", ctx.material_id.to_string()),
                "/api/cadet/results" => query_key = Some("cadet_id"),
                p if p.contains('{') => return None,
                _ => {}
            }
            SampleBody::None
        }
        (Method::Post, "/api/admin/login" | "/api/staff/login" | "/api/cadet/login") => {
            SampleBody::Json(json!({ "email": STRANGER_EMAIL, "password": "not-the-password" }))
        }
        (Method::Post, "/api/logout") => SampleBody::None,
        (Method::Post, "/api/staff/register") => SampleBody::Json(json!({
            "pin": UNKNOWN_PIN,
            "sur_name": "Audit",
            "first_name": "Probe",
            "email": STRANGER_EMAIL,
            "password": "audit-probe-pass-1",
        })),
        (Method::Post, "/api/cadet/register") => SampleBody::Json(json!({
            "pin": UNKNOWN_PIN,
            "npa_number": "NPA/04/09/00999",
            "sur_name": "Audit",
            "first_name": "Probe",
            "email": STRANGER_EMAIL,
            "password": "audit-probe-pass-1",
            "rc": 1,
            "level": 100,
            "semester": "first",
            "squad": 1,
            "sex": "F",
        })),
        (Method::Post, "/api/password-reset/begin") => {
            SampleBody::Json(json!({ "kind": "staff", "email": STRANGER_EMAIL }))
        }
        (Method::Post, "/api/password-reset/complete") => SampleBody::Json(
            json!({ "token": "00".repeat(32), "new_password": "audit-probe-pass-1" }),
        ),
        (Method::Patch, "/api/me") => match role {
            Some(Role::Admin) => SampleBody::Json(json!({ "name": "Registry" })),
            _ => SampleBody::Json(json!({ "address": "Kaduna" })),
        },
        (Method::Post, "/api/me/password") => SampleBody::Json(json!({
            "current_password": "definitely-not-current-1",
            "new_password": "audit-probe-pass-1",
        })),
        (Method::Post, "/api/admin/staff") => {
            SampleBody::Json(json!({ "id": ctx.lecturer_id, "address": "Kaduna" }))
        }
        (Method::Patch, "/api/admin/staff/{id}") => {
            param("id", ctx.lecturer_id.to_string());
            SampleBody::Json(json!({ "address": "Kaduna" }))
        }
        (Method::Post, "/api/admin/staff-pins") => {
            SampleBody::Json(json!({ "department": ctx.department, "count": 1 }))
        }
        (Method::Delete, "/api/admin/staff-pins/{code}" | "/api/hod/cadet-pins/{code}") => {
            param("code", UNKNOWN_PIN.to_owned());
            SampleBody::None
        }
        (Method::Post, "/api/admin/events") => SampleBody::Json(json!({
            "title": "Audit notice",
            "body": "Scheduled security review",
            "event_date": "2019-09-02",
        })),
        (Method::Post, "/api/hod/cadets") => {
            SampleBody::Json(json!({ "id": ctx.cadet_id, "middle_name": "Audit" }))
        }
        (Method::Post, "/api/hod/cadet-pins") => {
            SampleBody::Json(json!({ "department": ctx.department, "count": 1 }))
        }
        (Method::Post, "/api/hod/npa-roster") => text("NPA/04/09/00999\n", "text/plain"),
        (Method::Post, "/api/hod/courses") => SampleBody::Json(json!({
            "course_code": "AUD-501",
            "course_title": "Audit Methods",
            "level": 500,
            "unit": 1,
            "semester": "second",
            "year": 2019,
        })),
        (Method::Patch, "/api/hod/courses/{code}") => {
            param("code", UNKNOWN_COURSE.to_owned());
            SampleBody::Json(json!({ "course_title": "Audit Methods" }))
        }
        (Method::Delete, "/api/hod/courses/{code}") => {
            param("code", UNKNOWN_COURSE.to_owned());
            SampleBody::None
        }
        (Method::Post, "/api/hod/assignments") => {
            SampleBody::Json(json!({ "course_code": UNKNOWN_COURSE, "staff_id": ctx.lecturer_id }))
        }
        (Method::Post, "/api/hod/registration-window") => {
            SampleBody::Json(json!({ "department": ctx.department, "open": true }))
        }
        (Method::Post, "/api/lecturer/courses/{code}/scores") => {
            param("code", ctx.course_code.clone());
            text("npa_number,total\nNPA/04/09/00999,50\n", "text/csv")
        }
        (Method::Post, "/api/lecturer/courses/{code}/materials") => {
            param("code", ctx.course_code.clone());
            SampleBody::Multipart {
                filename: "audit-notes.pdf".into(),
                bytes: b"%PDF-1.4\naudit probe\n".to_vec(),
            }
        }
        (Method::Post, "/api/cadet/registrations") => {
            SampleBody::Json(json!({ "course_codes": [ctx.course_code] }))
        }
        _ => return None,
    };
    let declared = match &body {
        SampleBody::None => Body::None,
        SampleBody::Json(_) => Body::Json,
        SampleBody::Text(_, "text/csv") => Body::Csv,
        SampleBody::Text(..) => Body::Text,
        SampleBody::Multipart { .. } => Body::Multipart,
    };
    if declared != route.body {
        return None;
    }
    Some(Sample {
        route,
        params,
        body,
        query_key,
        query: None,
    })
}

/// Roles in the order the sweeps try them.
pub const ROLES: [Role; 4] = [Role::Admin, Role::Hod, Role::Lecturer, Role::Cadet];
