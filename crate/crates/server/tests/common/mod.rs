#![allow(dead_code)]

use std::sync::Arc;

use reqwest::blocking::{Client, RequestBuilder, Response};
use reqwest::Method;
use serde_json::{json, Value};
use sims_core::security::EncryptionKey;
use sims_core::service::AdminSeed;
use sims_core::{ServiceConfig, Sims, SystemClock};
use sims_server::{BackgroundServer, CookiePolicy, CSRF_HEADER, SESSION_COOKIE};
use tempfile::TempDir;

pub const ADMIN_EMAIL: &str = "admin@nda.edu.ng";
pub const ADMIN_PASSWORD: &str = "admin-pass-2019";

pub struct TestServer {
    pub server: Option<BackgroundServer>,
    pub sims: Sims,
    pub base: String,
    pub dir: TempDir,
}

pub fn config(dir: &TempDir) -> ServiceConfig {
    ServiceConfig::new(
        dir.path().join("sims.db"),
        dir.path().join("uploads"),
        EncryptionKey::generate(),
    )
}

pub fn open_migrated(dir: &TempDir) -> Sims {
    let sims = Sims::open(config(dir), Arc::new(SystemClock)).unwrap();
    sims.migrate().unwrap();
    sims.seed(Some(&AdminSeed {
        name: "Administrator".into(),
        email: ADMIN_EMAIL.into(),
        password: ADMIN_PASSWORD.into(),
    }))
    .unwrap();
    sims
}

impl TestServer {
    pub fn start() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let sims = open_migrated(&dir);
        let server = BackgroundServer::start(
            sims.clone(),
            "127.0.0.1:0".parse().unwrap(),
            CookiePolicy { secure: false },
        )
        .unwrap();
        let base = server.base_url();
        Self {
            server: Some(server),
            sims,
            base,
            dir,
        }
    }

    pub fn anonymous(&self) -> Session {
        Session {
            http: Client::new(),
            base: self.base.clone(),
            token: None,
            csrf: None,
        }
    }

    pub fn login(&self, kind: &str, email: &str, password: &str) -> Session {
        let mut session = self.anonymous();
        let response = session.login(kind, email, password);
        assert_eq!(response.status(), 200, "login {kind} {email}");
        session
    }

    pub fn admin(&self) -> Session {
        self.login("admin", ADMIN_EMAIL, ADMIN_PASSWORD)
    }
}

pub struct Session {
    pub http: Client,
    pub base: String,
    pub token: Option<String>,
    pub csrf: Option<String>,
}

pub fn cookie_value(response: &Response) -> Option<String> {
    response
        .headers()
        .get_all("set-cookie")
        .iter()
        .filter_map(|v| v.to_str().ok())
        .find_map(|v| {
            v.strip_prefix(&format!("{SESSION_COOKIE}="))
                .map(|rest| rest.split(';').next().unwrap().to_owned())
        })
}

impl Session {
    pub fn request(&self, method: Method, path: &str) -> RequestBuilder {
        let mut builder = self
            .http
            .request(method.clone(), format!("{}{path}", self.base));
        if let Some(token) = &self.token {
            builder = builder.header("cookie", format!("{SESSION_COOKIE}={token}"));
        }
        if method != Method::GET {
            if let Some(csrf) = &self.csrf {
                builder = builder.header(CSRF_HEADER, csrf);
            }
        }
        builder
    }

    pub fn login(&mut self, kind: &str, email: &str, password: &str) -> Response {
        let response = self
            .request(Method::POST, &format!("/api/{kind}/login"))
            .json(&json!({ "email": email, "password": password }))
            .send()
            .unwrap();
        if response.status() == 200 {
            self.token = cookie_value(&response);
            let body: Value = serde_json::from_slice(&response.bytes().unwrap()).unwrap();
            self.csrf = body["csrf_token"].as_str().map(str::to_owned);
            let again = self.request(Method::GET, "/api/csrf").send().unwrap();
            assert_eq!(again.status(), 200);
            return again;
        }
        response
    }

    pub fn get(&self, path: &str) -> Response {
        self.request(Method::GET, path).send().unwrap()
    }

    pub fn send_json(&self, method: Method, path: &str, body: &Value) -> Response {
        self.request(method, path).json(body).send().unwrap()
    }

    pub fn post(&self, path: &str, body: &Value) -> Response {
        self.send_json(Method::POST, path, body)
    }
}

pub fn body(response: Response) -> Value {
    let bytes = response.bytes().unwrap();
    serde_json::from_slice(&bytes)
        .unwrap_or_else(|_| panic!("not JSON: {}", String::from_utf8_lossy(&bytes)))
}

pub fn error_code(response: Response) -> String {
    body(response)["error"]["code"]
        .as_str()
        .unwrap_or_default()
        .to_owned()
}

/// Admin issues a staff pin; the staff member registers, logs in and
/// completes registration with `designation`.
pub fn staff(
    server: &TestServer,
    admin: &Session,
    department: &str,
    designation: &str,
    email: &str,
) -> Session {
    let pins = body(admin.post(
        "/api/admin/staff-pins",
        &json!({ "department": department, "count": 1 }),
    ));
    let pin = pins[0]["pin_code"].as_str().unwrap();
    let registered = server.anonymous().post(
        "/api/staff/register",
        &json!({ "pin": pin, "sur_name": "Bello", "first_name": "Musa", "email": email, "password": "staff-pass-2019" }),
    );
    assert_eq!(registered.status(), 201);
    let session = server.login("staff", email, "staff-pass-2019");
    let done = session.send_json(
        Method::PATCH,
        "/api/me",
        &json!({ "designation": designation }),
    );
    assert_eq!(done.status(), 200);
    session
}

/// HOD issues a cadet pin and rosters `npa`; the cadet registers and logs in.
pub fn cadet(server: &TestServer, hod: &Session, npa: &str, email: &str) -> Session {
    let pins = body(hod.post("/api/hod/cadet-pins", &json!({ "count": 1 })));
    let pin = pins[0]["pin_code"].as_str().unwrap();
    let roster = hod
        .request(Method::POST, "/api/hod/npa-roster")
        .header("content-type", "text/plain")
        .body(format!("{npa}\n"))
        .send()
        .unwrap();
    assert_eq!(roster.status(), 200);
    let registered = server.anonymous().post(
        "/api/cadet/register",
        &json!({
            "pin": pin, "npa_number": npa, "sur_name": "Okafor", "first_name": "Ada",
            "email": email, "password": "cadet-pass-2019", "rc": 6, "level": 100,
            "semester": "first", "squad": 3, "sex": "F"
        }),
    );
    assert_eq!(registered.status(), 201, "{}", registered.text().unwrap());
    server.login("cadet", email, "cadet-pass-2019")
}
