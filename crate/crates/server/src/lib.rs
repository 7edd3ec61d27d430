//! HTTP transport for the student information service.
//!
//! The router is built from [`sims_core::routes::ROUTES`]. Every request
//! passes the same chain: session cookie, then the anti-forgery header on
//! state-changing routes, then the permission matrix. Resource scope is
//! checked by the core operation the handler delegates to.

pub mod app;
pub mod config;
pub mod error;
mod extract;
mod handlers;
pub mod serve;

pub use app::{router, AppState, CSRF_HEADER, SESSION_COOKIE};
pub use config::{CookiePolicy, ServiceArgs};
pub use error::ApiError;
pub use serve::{start, BackgroundServer, ServeError, ServerHandle};
