//! Persistent entities. Credential material is never serialized.

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::grade::Grade;
use super::npa::NpaNumber;
use super::types::{AccountKind, Designation, Level, MediaKind, PinRole, Semester, Sex};

pub const DEFAULT_PASSPORT: &str = "avatar.png";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admin {
    pub id: i64,
    pub name: String,
    pub email: String,
    pub passport: String,
    #[serde(skip)]
    pub password_hash: String,
    #[serde(skip)]
    pub remember_token: Option<String>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Staff {
    pub id: i64,
    pub sur_name: String,
    pub first_name: String,
    /// Resolved through the department; not stored on the staff row.
    pub faculty: String,
    pub department: String,
    #[serde(skip)]
    pub pin: String,
    pub passport: String,
    pub cv: Option<String>,
    pub designation: Option<Designation>,
    pub address: Option<String>,
    pub email: String,
    pub dob: Option<String>,
    #[serde(skip)]
    pub password_hash: String,
    #[serde(skip)]
    pub remember_token: Option<String>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

/// Optional biographical fields on the cadet record.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonalDetails {
    pub dob: Option<String>,
    pub home_town: Option<String>,
    pub local_govt: Option<String>,
    pub state: Option<String>,
    pub address: Option<String>,
    pub next_of_kin_sur_name: Option<String>,
    pub next_of_kin_first_name: Option<String>,
    pub next_of_kin_relationship: Option<String>,
    pub next_of_kin_address: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cadet {
    pub id: i64,
    pub sur_name: String,
    pub first_name: String,
    pub middle_name: Option<String>,
    pub npa_number: NpaNumber,
    #[serde(skip)]
    pub pin: String,
    pub email: String,
    /// Regular-course cohort number.
    pub rc: u32,
    pub faculty: String,
    pub department: String,
    pub level: Level,
    pub semester: Semester,
    pub squad: u32,
    pub sex: Sex,
    #[serde(flatten)]
    pub personal: PersonalDetails,
    pub passport: String,
    #[serde(skip)]
    pub password_hash: String,
    #[serde(skip)]
    pub remember_token: Option<String>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Faculty {
    pub name: String,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub deleted_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Department {
    pub name: String,
    pub faculty_name: String,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub deleted_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Course {
    #[serde(skip)]
    pub id: i64,
    pub course_code: String,
    pub course_title: String,
    pub dept_name: String,
    pub level: Level,
    pub unit: u32,
    pub semester: Semester,
    pub year: i32,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub deleted_at: Option<DateTime<Utc>>,
}

/// Reference to an account: which store and which row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AccountRef {
    pub kind: AccountKind,
    pub id: i64,
}

impl std::fmt::Display for AccountRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.kind, self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistrationPin {
    pub pin_code: String,
    pub target_role: PinRole,
    pub department: String,
    pub consumed: bool,
    pub consumed_by: Option<AccountRef>,
    pub created_by: AccountRef,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NpaRosterEntry {
    pub npa_number: NpaNumber,
    pub department: String,
    pub claimed: bool,
    #[serde(skip)]
    pub claimed_by: Option<i64>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CourseAssignment {
    #[serde(skip)]
    pub course_id: i64,
    pub course_code: String,
    pub staff_id: i64,
    pub session: i32,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CourseRegistration {
    pub id: i64,
    pub cadet_id: i64,
    #[serde(skip)]
    pub course_id: i64,
    pub course_code: String,
    pub session: i32,
    pub semester: Semester,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Score {
    pub registration_id: i64,
    pub cadet_id: i64,
    pub course_code: String,
    pub session: i32,
    pub semester: Semester,
    pub total: f64,
    /// Derived from `total` on read; never stored.
    pub grade: Grade,
    pub uploaded_by: i64,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Material {
    pub id: i64,
    #[serde(skip)]
    pub course_id: i64,
    pub course_code: String,
    pub original_filename: String,
    #[serde(skip)]
    pub stored_name: String,
    pub size_bytes: u64,
    pub media_kind: MediaKind,
    pub uploaded_by: i64,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub id: i64,
    pub title: String,
    pub body: String,
    pub event_date: NaiveDate,
    pub created_by: i64,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcademicSession {
    pub year: i32,
    pub current_semester: Semester,
    /// Departments whose course registration window is open.
    pub registration_open: std::collections::BTreeMap<String, bool>,
}

impl AcademicSession {
    pub fn is_open_for(&self, department: &str) -> bool {
        self.registration_open
            .get(department)
            .copied()
            .unwrap_or(false)
    }
}
