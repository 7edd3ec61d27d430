//! Core of the academy student information service.
//!
//! The crate is organised bottom-up:
//!
//! - [`domain`]: entities, value types and field validation. No I/O.
//! - [`store`]: the embedded relational store, migrations and transactions.
//! - [`security`]: password hashing, sealing, sessions, CSRF, password reset
//!   and login throttling.
//! - [`access`]: the static role/action permission matrix and scope checks.
//! - [`onboarding`] and [`academics`]: the workflows, exposed as methods on
//!   [`Sims`].
//! - [`routes`]: the HTTP route table shared by the server and the probe CLI.

pub mod academics;
pub mod access;
pub mod audit_log;
pub mod auth;
pub mod clock;
pub mod config;
pub mod demo;
pub mod domain;
pub mod error;
pub mod onboarding;
pub mod profile;
pub mod routes;
pub mod security;
pub mod service;
pub mod store;

pub use access::{Action, Principal, PrincipalRef, Resource};
pub use clock::{Clock, ManualClock, SystemClock};
pub use config::ServiceConfig;
pub use error::{Error, Result, ValidationError};
pub use service::Sims;
