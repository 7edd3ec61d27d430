use thiserror::Error;

use crate::store::StoreError;

/// Field-level validation failures. Each maps to a stable machine code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("malformed NPA number")]
    MalformedNpaNumber,
    #[error("malformed email address")]
    MalformedEmail,
    #[error("score must be between 0 and 100")]
    ScoreOutOfRange,
    #[error("password must be at least 8 characters")]
    WeakPassword,
    #[error("pin count must be between 1 and 500")]
    CountOutOfRange,
    #[error("invalid value for {0}")]
    InvalidField(&'static str),
    #[error("roster upload exceeds the line limit")]
    RosterTooLarge,
}

impl ValidationError {
    pub fn machine_code(&self) -> &'static str {
        match self {
            Self::MalformedNpaNumber => "malformed_npa_number",
            Self::MalformedEmail => "malformed_email",
            Self::ScoreOutOfRange => "score_out_of_range",
            Self::WeakPassword => "weak_password",
            Self::CountOutOfRange => "count_out_of_range",
            Self::InvalidField(_) => "invalid_field",
            Self::RosterTooLarge => "roster_too_large",
        }
    }
}

/// Every failure a service operation can report.
///
/// `Display` strings are safe to show to clients: they never contain query
/// text, file paths or key material. Internal detail stays in the `source`
/// chain and is logged server-side only.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("a record with this key already exists")]
    DuplicateKey,
    #[error("referenced record does not exist")]
    ForeignKeyViolation,
    #[error("not found")]
    NotFound,
    #[error("registration pin not found")]
    PinNotFound,
    #[error("registration pin already used")]
    PinAlreadyConsumed,
    #[error("registration pin is not valid for this registration")]
    PinScopeMismatch,
    #[error("NPA number is not on the department roster")]
    NpaNotOnRoster,
    #[error("NPA number already claimed")]
    NpaAlreadyClaimed,
    #[error("the department already has a head of department")]
    HodSeatTaken,
    #[error("invalid credentials")]
    InvalidCredentials,
    #[error("invalid session")]
    InvalidSession,
    #[error("forbidden")]
    Unauthorized,
    #[error("CSRF token missing or invalid")]
    CsrfMismatch,
    #[error("too many failed attempts, try again later")]
    LockedOut,
    #[error("invalid or expired reset token")]
    InvalidResetToken,
    #[error("course registration is closed")]
    RegistrationClosed,
    #[error("course {0} is not available for registration")]
    IneligibleCourse(String),
    #[error("staff member belongs to another department")]
    CrossDepartment,
    #[error("file exceeds the upload size limit")]
    FileTooLarge,
    #[error("file type is not allowed")]
    DisallowedType,
    #[error("data integrity check failed")]
    IntegrityFailure,
    #[error("storage unavailable")]
    StorageUnavailable(#[source] StoreError),
    #[error("internal error")]
    Internal(#[source] Box<dyn std::error::Error + Send + Sync>),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn machine_code(&self) -> &'static str {
        match self {
            Self::Validation(v) => v.machine_code(),
            Self::DuplicateKey => "duplicate_key",
            Self::ForeignKeyViolation => "foreign_key_violation",
            Self::NotFound => "not_found",
            Self::PinNotFound => "pin_not_found",
            Self::PinAlreadyConsumed => "pin_already_consumed",
            Self::PinScopeMismatch => "pin_scope_mismatch",
            Self::NpaNotOnRoster => "npa_not_on_roster",
            Self::NpaAlreadyClaimed => "npa_already_claimed",
            Self::HodSeatTaken => "hod_seat_taken",
            Self::InvalidCredentials => "invalid_credentials",
            Self::InvalidSession => "invalid_session",
            Self::Unauthorized => "forbidden",
            Self::CsrfMismatch => "csrf_mismatch",
            Self::LockedOut => "throttled",
            Self::InvalidResetToken => "invalid_reset_token",
            Self::RegistrationClosed => "registration_closed",
            Self::IneligibleCourse(_) => "ineligible_course",
            Self::CrossDepartment => "cross_department",
            Self::FileTooLarge => "file_too_large",
            Self::DisallowedType => "disallowed_type",
            Self::IntegrityFailure => "integrity_failure",
            Self::StorageUnavailable(_) => "storage_unavailable",
            Self::Internal(_) => "internal",
        }
    }

    pub fn internal(err: impl std::error::Error + Send + Sync + 'static) -> Self {
        Self::Internal(Box::new(err))
    }
}

impl From<StoreError> for Error {
    fn from(err: StoreError) -> Self {
        match err {
            StoreError::DuplicateKey(_) => Error::DuplicateKey,
            StoreError::ForeignKeyViolation => Error::ForeignKeyViolation,
            StoreError::NotFound => Error::NotFound,
            StoreError::PinNotFound => Error::PinNotFound,
            StoreError::PinAlreadyConsumed => Error::PinAlreadyConsumed,
            StoreError::PinScopeMismatch => Error::PinScopeMismatch,
            StoreError::CheckViolation(_) => {
                Error::Validation(ValidationError::InvalidField("record"))
            }
            other @ (StoreError::Unavailable(_) | StoreError::NotMigrated) => {
                Error::StorageUnavailable(other)
            }
            other @ (StoreError::Sqlite(_) | StoreError::Io(_) | StoreError::Corrupt(_)) => {
                Error::Internal(Box::new(other))
            }
        }
    }
}
