use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Enums persisted and transported as short lowercase text tokens.
macro_rules! text_enum {
    ($(#[$meta:meta])* $name:ident, $field:literal { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = ValidationError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $(if s.eq_ignore_ascii_case($text) {
                    return Ok($name::$variant);
                })+
                Err(ValidationError::InvalidField($field))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

text_enum!(
    /// The role an authenticated principal acts in. Hod and Lecturer are
    /// staff designations, not separate account stores.
    Role, "role" {
        Admin => "admin",
        Hod => "hod",
        Lecturer => "lecturer",
        Cadet => "cadet",
    }
);

text_enum!(
    /// Which account table a principal lives in.
    AccountKind, "account" {
        Admin => "admin",
        Staff => "staff",
        Cadet => "cadet",
    }
);

text_enum!(Designation, "designation" {
    Hod => "hod",
    Lecturer => "lecturer",
});

text_enum!(Semester, "semester" {
    First => "first",
    Second => "second",
});

text_enum!(Sex, "sex" {
    M => "M",
    F => "F",
});

text_enum!(
    /// Which kind of account a registration pin onboards.
    PinRole, "target_role" {
        Staff => "staff",
        Cadet => "cadet",
    }
);

text_enum!(
    /// Whitelisted course material formats.
    MediaKind, "media_kind" {
        Pdf => "pdf",
        Doc => "doc",
        Docx => "docx",
        Ppt => "ppt",
        Pptx => "pptx",
    }
);

impl MediaKind {
    /// Classifies an upload by extension and checks the leading bytes agree.
    pub fn detect(filename: &str, content: &[u8]) -> Option<MediaKind> {
        let ext = filename.rsplit_once('.')?.1;
        let kind: MediaKind = ext.parse().ok()?;
        let magic_ok = match kind {
            MediaKind::Pdf => content.starts_with(b"%PDF-"),
            // OLE2 compound document
            MediaKind::Doc | MediaKind::Ppt => {
                content.starts_with(&[0xD0, 0xCF, 0x11, 0xE0, 0xA1, 0xB1, 0x1A, 0xE1])
            }
            // OOXML is a zip container
            MediaKind::Docx | MediaKind::Pptx => content.starts_with(b"PK\x03\x04"),
        };
        magic_ok.then_some(kind)
    }
}

impl From<Designation> for Role {
    fn from(d: Designation) -> Self {
        match d {
            Designation::Hod => Role::Hod,
            Designation::Lecturer => Role::Lecturer,
        }
    }
}

/// Study level, one of 100..=500 in steps of 100.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct Level(u16);

impl Level {
    pub const ALL: [u16; 5] = [100, 200, 300, 400, 500];

    pub fn new(value: u16) -> Result<Self, ValidationError> {
        if Self::ALL.contains(&value) {
            Ok(Self(value))
        } else {
            Err(ValidationError::InvalidField("level"))
        }
    }

    pub fn value(self) -> u16 {
        self.0
    }
}

impl TryFrom<u16> for Level {
    type Error = ValidationError;

    fn try_from(value: u16) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Level> for u16 {
    fn from(l: Level) -> Self {
        l.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Trims and bounds a required free-text field.
pub fn required_text(value: &str, field: &'static str) -> Result<String, ValidationError> {
    let trimmed = value.trim();
    if trimmed.is_empty() || trimmed.chars().count() > 191 || trimmed.contains('\0') {
        return Err(ValidationError::InvalidField(field));
    }
    Ok(trimmed.to_owned())
}

/// Like [`required_text`] but blank input becomes `None`.
pub fn optional_text(
    value: Option<&str>,
    field: &'static str,
) -> Result<Option<String>, ValidationError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => required_text(v, field).map(Some),
    }
}
