use thiserror::Error;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("target {url} is unreachable: {reason}")]
    TargetUnreachable { url: String, reason: String },
    #[error("fixture is invalid: {0}")]
    FixtureInvalid(String),
    #[error("request to {path} failed: {reason}")]
    Transport { path: String, reason: String },
    #[error("seeding failed at {step}: {detail}")]
    Seed { step: &'static str, detail: String },
    #[error("cannot read storage: {0}")]
    Storage(String),
}
