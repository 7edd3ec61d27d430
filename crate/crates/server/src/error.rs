//! The JSON error shape and the mapping from core failures to statuses.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde_json::json;
use sims_core::Error;

/// Internal detail of a failure, attached to the response as an extension
/// so the logging layer can record it. It never reaches the client in a
/// hardened build.
#[derive(Debug, Clone)]
pub struct ErrorDetail(pub String);

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    detail: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn malformed_body(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed_body", message)
    }

    pub fn unsupported_media_type(expected: &str) -> Self {
        Self::new(
            StatusCode::UNSUPPORTED_MEDIA_TYPE,
            "unsupported_media_type",
            format!("expected a {expected} body"),
        )
    }

    pub fn payload_too_large() -> Self {
        Self::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "payload_too_large",
            "request body is too large",
        )
    }

    pub fn not_found() -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", "not found")
    }

    pub fn method_not_allowed() -> Self {
        Self::new(
            StatusCode::METHOD_NOT_ALLOWED,
            "method_not_allowed",
            "method not allowed",
        )
    }

    pub fn internal(detail: impl std::fmt::Display) -> Self {
        Self {
            detail: Some(detail.to_string()),
            ..Self::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "internal",
                "internal error",
            )
        }
    }
}

fn status_of(err: &Error) -> StatusCode {
    match err {
        Error::Validation(_)
        | Error::ForeignKeyViolation
        | Error::PinNotFound
        | Error::PinScopeMismatch
        | Error::NpaNotOnRoster
        | Error::InvalidResetToken
        | Error::IneligibleCourse(_)
        | Error::CrossDepartment => StatusCode::UNPROCESSABLE_ENTITY,
        Error::DuplicateKey
        | Error::PinAlreadyConsumed
        | Error::NpaAlreadyClaimed
        | Error::HodSeatTaken
        | Error::RegistrationClosed => StatusCode::CONFLICT,
        Error::NotFound => StatusCode::NOT_FOUND,
        Error::InvalidCredentials | Error::InvalidSession => StatusCode::UNAUTHORIZED,
        Error::Unauthorized | Error::CsrfMismatch => StatusCode::FORBIDDEN,
        Error::LockedOut => StatusCode::TOO_MANY_REQUESTS,
        Error::FileTooLarge => StatusCode::PAYLOAD_TOO_LARGE,
        Error::DisallowedType => StatusCode::UNSUPPORTED_MEDIA_TYPE,
        Error::StorageUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
        Error::IntegrityFailure | Error::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

/// The full source chain, for server-side logs only.
fn chain(err: &dyn std::error::Error) -> String {
    let mut out = err.to_string();
    let mut source = err.source();
    while let Some(s) = source {
        out.push_str(": ");
        out.push_str(&s.to_string());
        source = s.source();
    }
    out
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = status_of(&err);
        Self {
            status,
            code: err.machine_code(),
            message: err.to_string(),
            detail: status.is_server_error().then(|| chain(&err)),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        let mut response = crate::app::json_response(self.status, &body);
        if let Some(detail) = self.detail {
            response.extensions_mut().insert(ErrorDetail(detail));
        }
        response
    }
}
