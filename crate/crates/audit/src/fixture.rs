//! The credentials fixture: one account per role on a sacrificial instance.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::AuditError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Credential {
    pub email: String,
    pub password: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Accounts {
    pub admin: Credential,
    pub hod: Credential,
    pub lecturer: Credential,
    pub cadet: Credential,
    /// A second cadet of the same department, the target of horizontal probes.
    pub second_cadet: Credential,
}

impl Accounts {
    /// The login endpoint kind and credential of every account.
    pub fn all(&self) -> [(&'static str, &Credential); 5] {
        [
            ("admin", &self.admin),
            ("staff", &self.hod),
            ("staff", &self.lecturer),
            ("cadet", &self.cadet),
            ("cadet", &self.second_cadet),
        ]
    }
}

fn default_throttle_limit() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    /// The target's storage file, scanned for leaked secrets and read for
    /// audit records.
    pub storage_path: PathBuf,
    pub accounts: Accounts,
    /// A course the lecturer is assigned to and both cadets registered for.
    pub course_code: String,
    /// Failed logins allowed before the target must answer 429.
    #[serde(default = "default_throttle_limit")]
    pub throttle_limit: u32,
}

impl Fixture {
    pub fn load(path: &Path) -> Result<Self, AuditError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            AuditError::FixtureInvalid(format!("cannot read {}: {e}", path.display()))
        })?;
        let fixture: Fixture =
            serde_json::from_str(&text).map_err(|e| AuditError::FixtureInvalid(e.to_string()))?;
        fixture.validate()?;
        Ok(fixture)
    }

    pub fn validate(&self) -> Result<(), AuditError> {
        for (kind, credential) in self.accounts.all() {
            if !credential.email.contains('@') {
                return Err(AuditError::FixtureInvalid(format!(
                    "{kind} email {:?} is malformed",
                    credential.email
                )));
            }
            if credential.password.len() < 8 {
                return Err(AuditError::FixtureInvalid(format!(
                    "{kind} password is too short to be real"
                )));
            }
        }
        if self
            .accounts
            .cadet
            .email
            .eq_ignore_ascii_case(&self.accounts.second_cadet.email)
        {
            return Err(AuditError::FixtureInvalid(
                "the two cadets must be different accounts".into(),
            ));
        }
        if !self.storage_path.is_file() {
            return Err(AuditError::FixtureInvalid(format!(
                "storage file {} does not exist",
                self.storage_path.display()
            )));
        }
        if self.course_code.trim().is_empty() || self.throttle_limit == 0 {
            return Err(AuditError::FixtureInvalid(
                "course_code and throttle_limit are required".into(),
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(
            path,
            serde_json::to_string_pretty(self).expect("fixture serializes"),
        )
    }

    /// Every plaintext password in the fixture.
    pub fn passwords(&self) -> Vec<&str> {
        self.accounts
            .all()
            .iter()
            .map(|(_, c)| c.password.as_str())
            .collect()
    }
}
