use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Academy student identifier, normalized to `NPA/DD/DD/DDDDD`.
///
/// Input is accepted in any letter case; the stored form is always upper
/// case, which makes equality case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NpaNumber(String);

const GROUPS: [usize; 3] = [2, 2, 5];

impl NpaNumber {
    pub fn parse(raw: &str) -> Result<Self, ValidationError> {
        let upper = raw.to_ascii_uppercase();
        let rest = upper
            .strip_prefix("NPA/")
            .ok_or(ValidationError::MalformedNpaNumber)?;
        let parts: Vec<&str> = rest.split('/').collect();
        if parts.len() != GROUPS.len() {
            return Err(ValidationError::MalformedNpaNumber);
        }
        for (part, width) in parts.iter().zip(GROUPS) {
            if part.len() != width || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ValidationError::MalformedNpaNumber);
            }
        }
        Ok(Self(upper))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NpaNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for NpaNumber {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl TryFrom<String> for NpaNumber {
    type Error = ValidationError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::parse(&value)
    }
}

impl From<NpaNumber> for String {
    fn from(value: NpaNumber) -> Self {
        value.0
    }
}
