//! The HTTP route table. The server builds its router from it and the probe
//! CLI sweeps it, so both always agree on what exists.

use serde::Serialize;

use crate::access::{is_public, Action};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Get,
    Post,
    Patch,
    Delete,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Get => "GET",
            Method::Post => "POST",
            Method::Patch => "PATCH",
            Method::Delete => "DELETE",
        }
    }

    pub fn is_state_changing(self) -> bool {
        !matches!(self, Method::Get)
    }

    pub fn parse(text: &str) -> Option<Method> {
        match text {
            "GET" => Some(Method::Get),
            "POST" => Some(Method::Post),
            "PATCH" => Some(Method::Patch),
            "DELETE" => Some(Method::Delete),
            _ => None,
        }
    }
}

/// Request body shape, used by the probe CLI to build payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Body {
    None,
    Json,
    Csv,
    Text,
    Multipart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Route {
    pub method: Method,
    /// Path template; parameters are written `{name}`.
    pub path: &'static str,
    pub action: Action,
    pub body: Body,
}

impl Route {
    pub fn requires_session(&self) -> bool {
        !is_public(self.action)
    }

    /// Every state-changing route that needs a session also needs the
    /// session's CSRF token.
    pub fn requires_csrf(&self) -> bool {
        self.method.is_state_changing() && self.requires_session()
    }

    /// The path with each `{param}` replaced by `fill(param)`.
    pub fn concrete(&self, mut fill: impl FnMut(&str) -> String) -> String {
        let mut out = String::with_capacity(self.path.len());
        let mut rest = self.path;
        while let Some(start) = rest.find('{') {
            out.push_str(&rest[..start]);
            let end = rest[start..].find('}').map_or(rest.len(), |e| start + e);
            out.push_str(&fill(&rest[start + 1..end]));
            rest = &rest[(end + 1).min(rest.len())..];
        }
        out.push_str(rest);
        out
    }
}

macro_rules! route {
    ($method:ident $path:literal => $action:ident, $body:ident) => {
        Route {
            method: Method::$method,
            path: $path,
            action: Action::$action,
            body: Body::$body,
        }
    };
}

pub static ROUTES: &[Route] = &[
    route!(Get "/health" => HealthCheck, None),
    route!(Post "/api/admin/login" => Login, Json),
    route!(Post "/api/staff/login" => Login, Json),
    route!(Post "/api/cadet/login" => Login, Json),
    route!(Post "/api/logout" => Logout, None),
    route!(Post "/api/staff/register" => RegisterStaff, Json),
    route!(Post "/api/cadet/register" => RegisterCadet, Json),
    route!(Post "/api/password-reset/begin" => BeginPasswordReset, Json),
    route!(Post "/api/password-reset/complete" => CompletePasswordReset, Json),
    route!(Get "/api/csrf" => IssueCsrf, None),
    route!(Get "/api/me" => ViewOwnProfile, None),
    route!(Patch "/api/me" => EditOwnProfile, Json),
    route!(Post "/api/me/password" => ChangeOwnPassword, Json),
    route!(Get "/api/events" => ListEvents, None),
    route!(Get "/api/admin/staff" => ViewStaffList, None),
    route!(Post "/api/admin/staff" => EditStaff, Json),
    route!(Patch "/api/admin/staff/{id}" => EditStaff, Json),
    route!(Get "/api/admin/staff-pins" => CreateStaffPin, None),
    route!(Post "/api/admin/staff-pins" => CreateStaffPin, Json),
    route!(Delete "/api/admin/staff-pins/{code}" => CreateStaffPin, None),
    route!(Get "/api/admin/events" => CreateEvent, None),
    route!(Post "/api/admin/events" => CreateEvent, Json),
    route!(Get "/api/hod/cadets" => ListCadets, None),
    route!(Post "/api/hod/cadets" => EditCadet, Json),
    route!(Get "/api/hod/cadet-pins" => CreateCadetPin, None),
    route!(Post "/api/hod/cadet-pins" => CreateCadetPin, Json),
    route!(Delete "/api/hod/cadet-pins/{code}" => CreateCadetPin, None),
    route!(Get "/api/hod/npa-roster" => UploadNpaNumbers, None),
    route!(Post "/api/hod/npa-roster" => UploadNpaNumbers, Text),
    route!(Get "/api/hod/courses" => CreateCourse, None),
    route!(Post "/api/hod/courses" => CreateCourse, Json),
    route!(Patch "/api/hod/courses/{code}" => EditCourse, Json),
    route!(Delete "/api/hod/courses/{code}" => DeleteCourse, None),
    route!(Post "/api/hod/assignments" => AssignCourse, Json),
    route!(Post "/api/hod/registration-window" => OpenRegistration, Json),
    route!(Get "/api/hod/results" => ViewDepartmentResults, None),
    route!(Get "/api/lecturer/courses" => ListAssignedCourses, None),
    route!(Get "/api/lecturer/courses/{code}/cadets" => ListRegisteredCadets, None),
    route!(Post "/api/lecturer/courses/{code}/scores" => UploadScores, Csv),
    route!(Post "/api/lecturer/courses/{code}/materials" => UploadMaterial, Multipart),
    route!(Get "/api/cadet/eligible-courses" => ViewEligibleCourses, None),
    route!(Post "/api/cadet/registrations" => RegisterCourses, Json),
    route!(Get "/api/cadet/results" => ViewOwnResults, None),
    route!(Get "/api/cadet/materials" => DownloadMaterials, None),
    route!(Get "/api/cadet/materials/{id}" => DownloadMaterials, None),
];

/// The route registered for `method` and path template `path`.
pub fn lookup(method: Method, path: &str) -> Option<&'static Route> {
    ROUTES.iter().find(|r| r.method == method && r.path == path)
}
