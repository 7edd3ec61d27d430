//! The static role/action permission matrix and resource scope checks.
//!
//! Authorization is two steps. The matrix answers whether a role may ever
//! perform an action. The scope predicate then answers whether this
//! principal may perform it on this resource: a head of department acts
//! within their own department, a lecturer on courses assigned to them, a
//! cadet on their own records. Anything not granted is denied.

use std::fmt;

use serde::Serialize;

use crate::demo::{Weakness, Weaknesses};
use crate::domain::{AccountKind, AccountRef, Role};
use crate::error::Error;

pub type PrincipalRef = AccountRef;

macro_rules! actions {
    ($($variant:ident => $text:literal),+ $(,)?) => {
        /// One semantic action per API endpoint.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
        #[serde(rename_all = "snake_case")]
        pub enum Action {
            $($variant),+
        }

        impl Action {
            pub const ALL: &'static [Action] = &[$(Action::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Action::$variant => $text),+
                }
            }
        }
    };
}

actions! {
    HealthCheck => "health_check",
    Login => "login",
    RegisterStaff => "register_staff",
    RegisterCadet => "register_cadet",
    BeginPasswordReset => "begin_password_reset",
    CompletePasswordReset => "complete_password_reset",
    Logout => "logout",
    IssueCsrf => "issue_csrf",
    ViewOwnProfile => "view_own_profile",
    ListEvents => "list_events",
    EditOwnProfile => "edit_own_profile",
    ChangeOwnPassword => "change_own_password",
    CreateStaffPin => "create_staff_pin",
    ViewStaffList => "view_staff_list",
    EditStaff => "edit_staff",
    CreateEvent => "create_event",
    CreateCadetPin => "create_cadet_pin",
    UploadNpaNumbers => "upload_npa_numbers",
    ListCadets => "list_cadets",
    EditCadet => "edit_cadet",
    CreateCourse => "create_course",
    EditCourse => "edit_course",
    DeleteCourse => "delete_course",
    AssignCourse => "assign_course",
    OpenRegistration => "open_registration",
    ViewDepartmentResults => "view_department_results",
    ListAssignedCourses => "list_assigned_courses",
    ListRegisteredCadets => "list_registered_cadets",
    UploadScores => "upload_scores",
    UploadMaterial => "upload_material",
    ViewEligibleCourses => "view_eligible_courses",
    RegisterCourses => "register_courses",
    ViewOwnResults => "view_own_results",
    DownloadMaterials => "download_materials",
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Actions that need no session at all.
pub const PUBLIC: &[Action] = &[
    Action::HealthCheck,
    Action::Login,
    Action::RegisterStaff,
    Action::RegisterCadet,
    Action::BeginPasswordReset,
    Action::CompletePasswordReset,
];

/// Session housekeeping every authenticated principal may perform,
/// including staff whose registration is not yet complete.
pub const COMMON: &[Action] = &[
    Action::Logout,
    Action::IssueCsrf,
    Action::ViewOwnProfile,
    Action::ListEvents,
    Action::EditOwnProfile,
    Action::ChangeOwnPassword,
];

const ADMIN: &[Action] = &[
    Action::CreateStaffPin,
    Action::ViewStaffList,
    Action::EditStaff,
    Action::CreateEvent,
    Action::EditOwnProfile,
    Action::ChangeOwnPassword,
];

const LECTURER: &[Action] = &[
    Action::ListAssignedCourses,
    Action::ListRegisteredCadets,
    Action::UploadScores,
    Action::UploadMaterial,
    Action::EditOwnProfile,
    Action::ChangeOwnPassword,
];

/// Added on top of [`LECTURER`].
const HOD_EXTRA: &[Action] = &[
    Action::CreateCadetPin,
    Action::UploadNpaNumbers,
    Action::ListCadets,
    Action::EditCadet,
    Action::CreateCourse,
    Action::EditCourse,
    Action::DeleteCourse,
    Action::AssignCourse,
    Action::OpenRegistration,
    Action::ViewDepartmentResults,
];

const CADET: &[Action] = &[
    Action::ViewEligibleCourses,
    Action::RegisterCourses,
    Action::ViewOwnResults,
    Action::DownloadMaterials,
    Action::EditOwnProfile,
    Action::ChangeOwnPassword,
];

/// The role-specific grant, without [`COMMON`] or [`PUBLIC`].
pub fn granted(role: Role, action: Action) -> bool {
    match role {
        Role::Admin => ADMIN.contains(&action),
        Role::Lecturer => LECTURER.contains(&action),
        Role::Hod => LECTURER.contains(&action) || HOD_EXTRA.contains(&action),
        Role::Cadet => CADET.contains(&action),
    }
}

/// Full matrix lookup for an authenticated principal of `role`.
pub fn permits(role: Role, action: Action) -> bool {
    COMMON.contains(&action) || granted(role, action)
}

pub fn is_public(action: Action) -> bool {
    PUBLIC.contains(&action)
}

/// An authenticated principal, resolved fresh from its account row on every
/// request so designation changes take effect immediately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Principal {
    pub account: AccountRef,
    pub role: Role,
    /// Department for staff and cadets; none for administrators.
    pub department: Option<String>,
    /// Staff with no designation yet. They may only manage their own
    /// session and profile until they complete registration.
    pub pending_completion: bool,
}

impl Principal {
    pub fn actor(&self) -> String {
        self.account.to_string()
    }

    pub fn is(&self, kind: AccountKind, id: i64) -> bool {
        self.account.kind == kind && self.account.id == id
    }
}

/// What an action is being performed on, as far as scope checks care.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resource {
    /// Unscoped: the principal's own records or a global listing.
    Any,
    Department(String),
    Course {
        department: String,
        /// Staff id assigned to the course in the session concerned.
        lecturer: Option<i64>,
    },
    Cadet {
        id: i64,
        department: String,
    },
    Staff {
        department: String,
    },
    Material {
        /// Whether the requesting cadet is registered for the course.
        cadet_registered: bool,
    },
}

fn in_scope(principal: &Principal, resource: &Resource, weaknesses: &Weaknesses) -> bool {
    let own_department = |d: &str| principal.department.as_deref() == Some(d);
    match (principal.role, resource) {
        (_, Resource::Any) => true,
        (Role::Admin, _) => true,
        (Role::Hod, Resource::Department(d))
        | (Role::Hod, Resource::Course { department: d, .. })
        | (Role::Hod, Resource::Cadet { department: d, .. })
        | (Role::Hod, Resource::Staff { department: d }) => own_department(d),
        (Role::Lecturer, Resource::Department(d)) => own_department(d),
        (Role::Lecturer, Resource::Course { lecturer, .. }) => {
            *lecturer == Some(principal.account.id)
        }
        (Role::Cadet, Resource::Cadet { id, .. }) => {
            principal.is(AccountKind::Cadet, *id) || weaknesses.contains(Weakness::AccessControl)
        }
        (Role::Cadet, Resource::Material { cadet_registered }) => *cadet_registered,
        _ => false,
    }
}

/// Permitted iff the matrix grants the action and the resource is in the
/// principal's scope. Denial carries no reason.
pub fn authorize_with(
    principal: &Principal,
    action: Action,
    resource: &Resource,
    weaknesses: &Weaknesses,
) -> Result<(), Error> {
    if is_public(action) {
        return Ok(());
    }
    let matrix = if principal.pending_completion {
        COMMON.contains(&action)
    } else {
        permits(principal.role, action)
    };
    if matrix && in_scope(principal, resource, weaknesses) {
        Ok(())
    } else {
        Err(Error::Unauthorized)
    }
}

pub fn authorize(principal: &Principal, action: Action, resource: &Resource) -> Result<(), Error> {
    authorize_with(principal, action, resource, &Weaknesses::none())
}

/// Department filter applied to every list query issued for `principal`.
/// `None` means unrestricted.
pub fn scope_department(principal: &Principal) -> Option<&str> {
    match principal.role {
        Role::Admin => None,
        Role::Hod | Role::Lecturer | Role::Cadet => principal.department.as_deref(),
    }
}

/// The matrix as a fixed-width text table, one row per action.
pub fn render_matrix() -> String {
    let roles = [Role::Admin, Role::Hod, Role::Lecturer, Role::Cadet];
    let width = Action::ALL
        .iter()
        .map(|a| a.as_str().len())
        .max()
        .unwrap_or(0);
    let mut out = format!("{:width$}", "action");
    for role in roles {
        out.push_str(&format!("  {:8}", role.as_str()));
    }
    out.push('\n');
    for action in Action::ALL {
        out.push_str(&format!("{:width$}", action.as_str()));
        for role in roles {
            let cell = if is_public(*action) {
                "public"
            } else if permits(role, *action) {
                "yes"
            } else {
                "-"
            };
            out.push_str(&format!("  {cell:8}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn principal(role: Role, id: i64, department: Option<&str>) -> Principal {
        let kind = match role {
            Role::Admin => AccountKind::Admin,
            Role::Hod | Role::Lecturer => AccountKind::Staff,
            Role::Cadet => AccountKind::Cadet,
        };
        Principal {
            account: AccountRef { kind, id },
            role,
            department: department.map(str::to_owned),
            pending_completion: false,
        }
    }

    #[test]
    fn assigned_lecturer_uploads_scores() {
        let l = principal(Role::Lecturer, 4, Some("Sociology"));
        let course = |lecturer| Resource::Course {
            department: "Sociology".into(),
            lecturer,
        };
        assert!(authorize(&l, Action::UploadScores, &course(Some(4))).is_ok());
        assert!(authorize(&l, Action::UploadScores, &course(Some(5))).is_err());
        assert!(authorize(&l, Action::UploadScores, &course(None)).is_err());
    }

    #[test]
    fn hod_uploads_for_any_course_of_their_department() {
        let h = principal(Role::Hod, 2, Some("Sociology"));
        let course = |department: &str| Resource::Course {
            department: department.into(),
            lecturer: Some(9),
        };
        assert!(authorize(&h, Action::UploadScores, &course("Sociology")).is_ok());
        assert!(authorize(&h, Action::UploadScores, &course("Computer Science")).is_err());
    }

    #[test]
    fn cadet_cannot_create_courses() {
        let c = principal(Role::Cadet, 1, Some("Sociology"));
        assert!(authorize(&c, Action::CreateCourse, &Resource::Any).is_err());
        assert!(authorize(
            &c,
            Action::CreateCourse,
            &Resource::Department("Sociology".into())
        )
        .is_err());
    }

    #[test]
    fn cadets_only_read_their_own_records() {
        let c = principal(Role::Cadet, 1, Some("Sociology"));
        let own = Resource::Cadet {
            id: 1,
            department: "Sociology".into(),
        };
        let other = Resource::Cadet {
            id: 2,
            department: "Sociology".into(),
        };
        assert!(authorize(&c, Action::ViewOwnResults, &own).is_ok());
        assert!(authorize(&c, Action::ViewOwnResults, &other).is_err());
    }

    #[test]
    fn pending_staff_only_reach_common_actions() {
        let mut p = principal(Role::Lecturer, 3, Some("Sociology"));
        p.pending_completion = true;
        for action in Action::ALL {
            let expected = is_public(*action) || COMMON.contains(action);
            assert_eq!(
                authorize(&p, *action, &Resource::Any).is_ok(),
                expected,
                "{action}"
            );
        }
    }

    #[test]
    fn every_action_has_a_unique_name() {
        let mut names: Vec<&str> = Action::ALL.iter().map(|a| a.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), Action::ALL.len());
    }

    #[test]
    fn hod_department_scope_partitions() {
        let a = principal(Role::Hod, 1, Some("Computer Science"));
        let b = principal(Role::Hod, 2, Some("Sociology"));
        assert_eq!(scope_department(&a), Some("Computer Science"));
        assert_eq!(scope_department(&b), Some("Sociology"));
        assert_eq!(scope_department(&principal(Role::Admin, 1, None)), None);
    }

    #[test]
    fn matrix_table_lists_every_action() {
        let table = render_matrix();
        assert_eq!(table.lines().count(), Action::ALL.len() + 1);
        assert!(table
            .lines()
            .any(|l| l.starts_with("create_course") && l.contains("yes") && l.contains('-')));
    }
}
