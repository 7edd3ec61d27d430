//! A blocking HTTP client that records every response it receives.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use reqwest::blocking::multipart::{Form, Part};
use reqwest::header::HeaderMap;
use reqwest::Method;
use serde_json::Value;

use crate::error::AuditError;

pub const SESSION_COOKIE: &str = "sims_session";
pub const CSRF_HEADER: &str = "x-csrf-token";

/// One captured response.
#[derive(Debug, Clone)]
pub struct Exchange {
    pub method: String,
    pub path: String,
    pub status: u16,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Exchange {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.get(name).and_then(|v| v.to_str().ok())
    }

    pub fn json(&self) -> Option<Value> {
        serde_json::from_slice(&self.body).ok()
    }

    pub fn error_code(&self) -> Option<String> {
        self.json()?["error"]["code"].as_str().map(str::to_owned)
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }

    /// The session token from `Set-Cookie`, if the response sets one.
    pub fn session_cookie(&self) -> Option<String> {
        self.headers
            .get_all("set-cookie")
            .iter()
            .filter_map(|v| v.to_str().ok())
            .find_map(|v| {
                v.strip_prefix(&format!("{SESSION_COOKIE}="))
                    .map(|r| r.split(';').next().unwrap_or("").to_owned())
            })
    }

    pub fn describe(&self) -> String {
        format!("{} {} -> {}", self.method, self.path, self.status)
    }
}

#[derive(Debug, Clone)]
pub enum Payload {
    None,
    Json(Value),
    /// Body text and its media type.
    Text(String, &'static str),
    /// Raw bytes with an arbitrary declared media type.
    Raw(Vec<u8>, String),
    Multipart {
        filename: String,
        bytes: Vec<u8>,
    },
}

/// Credentials for one authenticated session.
#[derive(Debug, Clone, Default)]
pub struct Session {
    pub token: Option<String>,
    pub csrf: Option<String>,
    /// The principal object returned at login.
    pub principal: Value,
}

impl Session {
    pub fn account_id(&self) -> Option<i64> {
        self.principal["account"]["id"].as_i64()
    }

    /// `kind:id`, as recorded in the audit trail.
    pub fn actor(&self) -> String {
        format!(
            "{}:{}",
            self.principal["account"]["kind"].as_str().unwrap_or("?"),
            self.account_id().unwrap_or(-1)
        )
    }
}

/// How a request presents the session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Csrf {
    /// Send the session's token on state-changing methods.
    Session,
    Omit,
    Wrong,
}

pub struct Request<'a> {
    pub method: Method,
    pub path: String,
    pub session: Option<&'a Session>,
    pub csrf: Csrf,
    pub payload: Payload,
    /// Raw cookie value to present instead of the session's.
    pub cookie_override: Option<String>,
}

impl<'a> Request<'a> {
    pub fn new(method: Method, path: impl Into<String>) -> Self {
        Self {
            method,
            path: path.into(),
            session: None,
            csrf: Csrf::Session,
            payload: Payload::None,
            cookie_override: None,
        }
    }

    pub fn get(path: impl Into<String>) -> Self {
        Self::new(Method::GET, path)
    }

    pub fn post(path: impl Into<String>, body: Value) -> Self {
        Self::new(Method::POST, path).payload(Payload::Json(body))
    }

    pub fn session(mut self, session: &'a Session) -> Self {
        self.session = Some(session);
        self
    }

    pub fn csrf(mut self, csrf: Csrf) -> Self {
        self.csrf = csrf;
        self
    }

    pub fn payload(mut self, payload: Payload) -> Self {
        self.payload = payload;
        self
    }

    pub fn cookie(mut self, value: impl Into<String>) -> Self {
        self.cookie_override = Some(value.into());
        self
    }
}

/// Percent-encodes one path segment.
pub fn segment(text: &str) -> String {
    utf8_percent_encode(text, NON_ALPHANUMERIC).to_string()
}

#[derive(Clone)]
pub struct Client {
    http: reqwest::blocking::Client,
    base: String,
    transcript: Arc<Mutex<Vec<Exchange>>>,
}

impl Client {
    pub fn new(base: &str) -> Result<Self, AuditError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .pool_max_idle_per_host(0)
            .redirect(reqwest::redirect::Policy::none())
            .build()
            .map_err(|e| AuditError::TargetUnreachable {
                url: base.to_owned(),
                reason: e.to_string(),
            })?;
        Ok(Self {
            http,
            base: base.trim_end_matches('/').to_owned(),
            transcript: Arc::default(),
        })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    /// Fails with [`AuditError::TargetUnreachable`] unless `/health` answers.
    pub fn check_reachable(&self) -> Result<(), AuditError> {
        let unreachable = |reason: String| AuditError::TargetUnreachable {
            url: self.base.clone(),
            reason,
        };
        let response = self
            .http
            .get(format!("{}/health", self.base))
            .send()
            .map_err(|e| unreachable(e.to_string()))?;
        if response.status().is_success() {
            Ok(())
        } else {
            Err(unreachable(format!(
                "/health answered {}",
                response.status()
            )))
        }
    }

    pub fn send(&self, request: Request<'_>) -> Result<Exchange, AuditError> {
        let url = format!("{}{}", self.base, request.path);
        let mut builder = self.http.request(request.method.clone(), url);
        let token = request
            .cookie_override
            .clone()
            .or_else(|| request.session.and_then(|s| s.token.clone()));
        if let Some(token) = token {
            builder = builder.header("cookie", format!("{SESSION_COOKIE}={token}"));
        }
        if request.method != Method::GET {
            match (
                request.csrf,
                request.session.and_then(|s| s.csrf.as_deref()),
            ) {
                (Csrf::Session, Some(token)) => builder = builder.header(CSRF_HEADER, token),
                (Csrf::Wrong, _) => builder = builder.header(CSRF_HEADER, "0000-not-the-token"),
                _ => {}
            }
        }
        builder = match request.payload {
            Payload::None => builder,
            Payload::Json(value) => builder.json(&value),
            Payload::Text(text, media) => builder.header("content-type", media).body(text),
            Payload::Raw(bytes, media) => builder.header("content-type", media).body(bytes),
            Payload::Multipart { filename, bytes } => {
                builder.multipart(Form::new().part("file", Part::bytes(bytes).file_name(filename)))
            }
        };
        let response = builder.send().map_err(|e| {
            if e.is_connect() {
                AuditError::TargetUnreachable {
                    url: self.base.clone(),
                    reason: e.to_string(),
                }
            } else {
                AuditError::Transport {
                    path: request.path.clone(),
                    reason: e.to_string(),
                }
            }
        })?;
        let status = response.status().as_u16();
        let headers = response.headers().clone();
        let body = response
            .bytes()
            .map_err(|e| AuditError::Transport {
                path: request.path.clone(),
                reason: e.to_string(),
            })?
            .to_vec();
        let exchange = Exchange {
            method: request.method.to_string(),
            path: request.path,
            status,
            headers,
            body,
        };
        self.transcript
            .lock()
            .expect("transcript lock")
            .push(exchange.clone());
        Ok(exchange)
    }

    /// Logs in at `/api/{kind}/login`. `Ok(None)` means the target refused.
    pub fn login(
        &self,
        kind: &str,
        email: &str,
        password: &str,
    ) -> Result<Option<Session>, AuditError> {
        let reply = self.send(Request::post(
            format!("/api/{kind}/login"),
            serde_json::json!({ "email": email, "password": password }),
        ))?;
        if reply.status != 200 {
            return Ok(None);
        }
        let body = reply.json().unwrap_or(Value::Null);
        Ok(Some(Session {
            token: reply.session_cookie(),
            csrf: body["csrf_token"].as_str().map(str::to_owned),
            principal: body["principal"].clone(),
        }))
    }

    /// Every response received so far.
    pub fn transcript(&self) -> Vec<Exchange> {
        self.transcript.lock().expect("transcript lock").clone()
    }

    pub fn transcript_len(&self) -> usize {
        self.transcript.lock().expect("transcript lock").len()
    }

    pub fn transcript_since(&self, start: usize) -> Vec<Exchange> {
        self.transcript.lock().expect("transcript lock")[start..].to_vec()
    }
}
