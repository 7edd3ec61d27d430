//! Router construction and the middleware every request passes through.

use std::net::SocketAddr;
use std::time::Instant;

use axum::body::Body;
use axum::extract::{ConnectInfo, DefaultBodyLimit, Request, State};
use axum::http::header::{self, HeaderMap, HeaderValue, CONTENT_LENGTH, CONTENT_TYPE};
use axum::http::StatusCode;
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::Router;
use cookie::{Cookie, SameSite};
use serde::Serialize;
use sims_core::demo::Weakness;
use sims_core::routes::{Body as BodyKind, Route, ROUTES};
use sims_core::{Error, Sims};

use crate::config::CookiePolicy;
use crate::error::{ApiError, ErrorDetail};
use crate::extract::{Ctx, UPLOAD_LIMIT};
use crate::handlers;

pub const SESSION_COOKIE: &str = "sims_session";
pub const CSRF_HEADER: &str = "x-csrf-token";
pub const JSON_CONTENT_TYPE: &str = "application/json; charset=utf-8";

#[derive(Clone)]
pub struct AppState {
    pub sims: Sims,
    pub cookie: CookiePolicy,
}

pub fn json_response<T: Serialize + ?Sized>(status: StatusCode, body: &T) -> Response {
    match serde_json::to_vec(body) {
        Ok(bytes) => (status, [(CONTENT_TYPE, JSON_CONTENT_TYPE)], bytes).into_response(),
        Err(e) => ApiError::internal(e).into_response(),
    }
}

/// Runs a core operation off the async executor.
pub async fn blocking<T, F>(work: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> sims_core::Result<T> + Send + 'static,
{
    match tokio::task::spawn_blocking(work).await {
        Ok(result) => result.map_err(ApiError::from),
        Err(join) => Err(ApiError::internal(join)),
    }
}

pub fn session_cookie(headers: &HeaderMap) -> Option<String> {
    headers
        .get_all(header::COOKIE)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| Cookie::split_parse(v.to_owned()))
        .filter_map(Result::ok)
        .find(|c| c.name() == SESSION_COOKIE)
        .map(|c| c.value().to_owned())
}

/// `Set-Cookie` value for a session token. An empty token with zero
/// lifetime clears the cookie.
pub fn set_cookie(token: &str, max_age_secs: i64, policy: CookiePolicy) -> HeaderValue {
    let cookie = Cookie::build((SESSION_COOKIE, token.to_owned()))
        .path("/")
        .http_only(true)
        .same_site(SameSite::Lax)
        .secure(policy.secure)
        .max_age(cookie::time::Duration::seconds(max_age_secs))
        .build();
    HeaderValue::from_str(&cookie.to_string()).expect("cookie attributes are header-safe")
}

fn peer(req: &Request) -> String {
    req.extensions()
        .get::<ConnectInfo<SocketAddr>>()
        .map_or_else(|| "unknown".to_owned(), |c| c.0.ip().to_string())
}

/// Session, then anti-forgery token, then the permission matrix.
async fn guard(
    State((state, route)): State<(AppState, &'static Route)>,
    mut req: Request,
    next: Next,
) -> Response {
    let presented = session_cookie(req.headers());
    let mut ctx = Ctx {
        source: peer(&req),
        session: None,
        presented_token: presented.clone(),
    };
    if route.requires_session() {
        let Some(token) = presented else {
            return ApiError::from(Error::InvalidSession).into_response();
        };
        let csrf = req
            .headers()
            .get(CSRF_HEADER)
            .and_then(|v| v.to_str().ok())
            .map(str::to_owned);
        let sims = state.sims.clone();
        let checked = blocking(move || {
            let session = sims.authenticate(&token)?;
            if route.requires_csrf() {
                sims.check_csrf(&session, csrf.as_deref())?;
            }
            sims.authorize_route(&session.principal, route.action)?;
            Ok(session)
        })
        .await;
        match checked {
            Ok(session) => ctx.session = Some(session),
            Err(e) => return e.into_response(),
        }
    }
    req.extensions_mut().insert(ctx);
    next.run(req).await
}

fn security_headers(headers: &mut HeaderMap) {
    for (name, value) in [
        ("x-content-type-options", "nosniff"),
        ("x-frame-options", "DENY"),
        (
            "content-security-policy",
            "default-src 'none'; frame-ancestors 'none'",
        ),
        ("referrer-policy", "no-referrer"),
        ("cache-control", "no-store"),
    ] {
        headers.insert(name, HeaderValue::from_static(value));
    }
}

/// Replaces the characters HTML treats as markup with JSON unicode escapes.
/// They can only occur inside JSON strings, so the document is unchanged
/// for any JSON reader.
pub fn escape_markup(json: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(json.len());
    for &b in json {
        match b {
            b'<' => out.extend_from_slice(b"\\u003c"),
            b'>' => out.extend_from_slice(b"\\u003e"),
            b'&' => out.extend_from_slice(b"\\u0026"),
            _ => out.push(b),
        }
    }
    out
}

fn is_json(headers: &HeaderMap) -> bool {
    headers
        .get(CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"))
}

/// Outermost layer: logging, markup escaping and security headers.
async fn finish(State(state): State<AppState>, req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_owned();
    let started = Instant::now();
    let mut response = next.run(req).await;
    let weaknesses = &state.sims.config().weaknesses;
    let detail = response.extensions_mut().remove::<ErrorDetail>();
    if let Some(ErrorDetail(detail)) = &detail {
        tracing::error!(%method, %path, %detail, "request failed");
    }
    if is_json(response.headers()) {
        let (mut parts, body) = response.into_parts();
        let mut bytes = axum::body::to_bytes(body, usize::MAX)
            .await
            .unwrap_or_default()
            .to_vec();
        if let (true, Some(ErrorDetail(detail))) = (weaknesses.contains(Weakness::Headers), &detail)
        {
            if let Ok(mut value) = serde_json::from_slice::<serde_json::Value>(&bytes) {
                value["error"]["detail"] = serde_json::Value::String(detail.clone());
                bytes = serde_json::to_vec(&value).unwrap_or(bytes);
            }
        }
        if weaknesses.contains(Weakness::Xss) {
            parts.headers.insert(
                CONTENT_TYPE,
                HeaderValue::from_static("text/html; charset=utf-8"),
            );
        } else {
            bytes = escape_markup(&bytes);
        }
        parts.headers.remove(CONTENT_LENGTH);
        response = Response::from_parts(parts, Body::from(bytes));
    }
    if !weaknesses.contains(Weakness::Headers) {
        security_headers(response.headers_mut());
    }
    tracing::info!(
        %method,
        %path,
        status = response.status().as_u16(),
        elapsed_ms = started.elapsed().as_millis() as u64,
        "request"
    );
    response
}

/// The complete application: one entry per route table row.
pub fn router(state: AppState) -> Router {
    let mut router = Router::new();
    for route in ROUTES {
        let mut method_router = handlers::method_router(route).route_layer(
            middleware::from_fn_with_state((state.clone(), route), guard),
        );
        if route.body == BodyKind::Multipart {
            method_router = method_router.layer(DefaultBodyLimit::max(UPLOAD_LIMIT));
        }
        router = router.route(route.path, method_router);
    }
    router
        .fallback(|| async { ApiError::not_found() })
        .method_not_allowed_fallback(|| async { ApiError::method_not_allowed() })
        .layer(middleware::from_fn_with_state(state.clone(), finish))
        .with_state(state)
}
