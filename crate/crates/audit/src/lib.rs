//! Runtime OWASP Top 10 (2017) probes against a running student
//! information service, plus a seeding walkthrough that provisions a
//! sacrificial instance and writes the credentials fixture the probes use.
//!
//! Every probe reports PASS when the attack it performs is repelled.

pub mod client;
pub mod error;
pub mod fixture;
pub mod probes;
pub mod report;
pub mod seed;
pub mod templates;

pub use client::Client;
pub use error::AuditError;
pub use fixture::Fixture;
pub use report::{AuditReport, Category, Format};

/// Probes `target` for the `categories` requested.
pub fn audit(
    target: &str,
    fixture: &Fixture,
    categories: &[Category],
) -> Result<AuditReport, AuditError> {
    let client = Client::new(target)?;
    probes::run(&client, fixture, categories)
}
