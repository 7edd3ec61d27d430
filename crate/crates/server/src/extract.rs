//! Request extractors whose rejections use the service's error shape
//! instead of the framework's plain-text defaults.

use axum::body::{Body, Bytes};
use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request};
use axum::http::header::CONTENT_TYPE;
use axum::http::request::Parts;
use axum::http::HeaderMap;
use serde::de::DeserializeOwned;
use sims_core::auth::Authenticated;

use crate::error::ApiError;

/// Structured request bodies.
pub const JSON_LIMIT: usize = 1024 * 1024;
/// Multipart uploads: the file cap plus room for part headers.
pub const UPLOAD_LIMIT: usize = 10 * 1024 * 1024 + 64 * 1024;

/// Per-request context the guard attaches before the handler runs.
#[derive(Debug, Clone)]
pub struct Ctx {
    /// Peer address, used as the throttle source.
    pub source: String,
    pub session: Option<Authenticated>,
    /// Session cookie value presented with the request, valid or not.
    pub presented_token: Option<String>,
}

impl Ctx {
    pub fn session(&self) -> Result<&Authenticated, ApiError> {
        self.session
            .as_ref()
            .ok_or_else(|| sims_core::Error::InvalidSession.into())
    }
}

impl<S: Send + Sync> FromRequestParts<S> for Ctx {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _state: &S) -> Result<Self, Self::Rejection> {
        parts
            .extensions
            .get::<Ctx>()
            .cloned()
            .ok_or_else(|| ApiError::internal("request context missing"))
    }
}

fn media_type(headers: &HeaderMap) -> Option<String> {
    let value = headers.get(CONTENT_TYPE)?.to_str().ok()?;
    Some(
        value
            .split(';')
            .next()
            .unwrap_or("")
            .trim()
            .to_ascii_lowercase(),
    )
}

fn is_length_limit(err: &axum::Error) -> bool {
    let mut source = std::error::Error::source(err);
    while let Some(s) = source {
        if s.is::<http_body_util::LengthLimitError>() {
            return true;
        }
        source = s.source();
    }
    false
}

pub async fn read_limited(body: Body, limit: usize) -> Result<Bytes, ApiError> {
    axum::body::to_bytes(body, limit).await.map_err(|e| {
        if is_length_limit(&e) {
            ApiError::payload_too_large()
        } else {
            ApiError::malformed_body("could not read request body")
        }
    })
}

/// A JSON body. Requires `application/json` and at most [`JSON_LIMIT`] bytes.
pub struct JsonBody<T>(pub T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequest<S> for JsonBody<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, _state: &S) -> Result<Self, Self::Rejection> {
        if media_type(req.headers()).as_deref() != Some("application/json") {
            return Err(ApiError::unsupported_media_type("application/json"));
        }
        let bytes = read_limited(req.into_body(), JSON_LIMIT).await?;
        parse_json(&bytes).map(JsonBody)
    }
}

pub fn parse_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => ApiError::new(
            axum::http::StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_body",
            e.to_string(),
        ),
        _ => ApiError::malformed_body("request body is not valid JSON"),
    })
}

/// A UTF-8 text body of one of the route's accepted media types.
pub struct TextBody(pub String);

async fn text_body(req: Request, accepted: &[&str]) -> Result<TextBody, ApiError> {
    match media_type(req.headers()) {
        Some(m) if accepted.contains(&m.as_str()) => {}
        _ => return Err(ApiError::unsupported_media_type(accepted[0])),
    }
    let bytes = read_limited(req.into_body(), JSON_LIMIT).await?;
    String::from_utf8(bytes.to_vec())
        .map(TextBody)
        .map_err(|_| ApiError::malformed_body("request body is not UTF-8"))
}

/// `text/csv` (or `text/plain`) body.
pub struct CsvBody(pub String);

impl<S: Send + Sync> FromRequest<S> for CsvBody {
    type Rejection = ApiError;

    async fn from_request(req: Request, _state: &S) -> Result<Self, Self::Rejection> {
        text_body(req, &["text/csv", "text/plain"])
            .await
            .map(|t| CsvBody(t.0))
    }
}

impl<S: Send + Sync> FromRequest<S> for TextBody {
    type Rejection = ApiError;

    async fn from_request(req: Request, _state: &S) -> Result<Self, Self::Rejection> {
        text_body(req, &["text/plain"]).await
    }
}

/// The single path parameter of a route.
pub struct Param(pub String);

impl<S: Send + Sync> FromRequestParts<S> for Param {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Path::<String>::from_request_parts(parts, state)
            .await
            .map(|Path(p)| Param(p))
            .map_err(|_| ApiError::not_found())
    }
}

impl Param {
    /// The parameter as a record id; anything else cannot name a record.
    pub fn id(&self) -> Result<i64, ApiError> {
        self.0.parse().map_err(|_| ApiError::not_found())
    }
}

/// Query string parameters.
pub struct QueryParams<T>(pub T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequestParts<S> for QueryParams<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _state: &S) -> Result<Self, Self::Rejection> {
        Query::<T>::try_from_uri(&parts.uri)
            .map(|Query(q)| QueryParams(q))
            .map_err(|e| {
                ApiError::new(
                    axum::http::StatusCode::UNPROCESSABLE_ENTITY,
                    "invalid_query",
                    e.body_text(),
                )
            })
    }
}
