//! Entities, value types and field-level validation. No storage, no
//! transport.

mod email;
mod entities;
mod grade;
mod npa;
mod types;

pub use email::validate_email;
pub use entities::*;
pub use grade::{grade_of, Grade};
pub use npa::NpaNumber;
pub use types::{
    optional_text, required_text, AccountKind, Designation, Level, MediaKind, PinRole, Role,
    Semester, Sex,
};
