//! One handler per route table row. Handlers only translate between HTTP
//! and the core operations.

use axum::extract::multipart::{Multipart, MultipartRejection};
use axum::extract::State;
use axum::http::header::{HeaderValue, CONTENT_DISPOSITION, CONTENT_TYPE, SET_COOKIE};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, patch, post, MethodRouter};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sims_core::academics::{AssignInput, CourseInput, CourseUpdate, EventInput, WindowInput};
use sims_core::domain::{AccountKind, PinRole};
use sims_core::onboarding::{CadetRegistration, StaffRegistration};
use sims_core::profile::{CadetUpdate, ProfileEdit, StaffUpdate};
use sims_core::routes::{Method, Route};
use sims_core::{Error, Principal};

use crate::app::{blocking, json_response, set_cookie, AppState};
use crate::error::ApiError;
use crate::extract::{parse_json, CsvBody, Ctx, JsonBody, Param, QueryParams, TextBody};

type Reply = Result<Response, ApiError>;

fn ok<T: Serialize>(value: &T) -> Reply {
    Ok(json_response(StatusCode::OK, value))
}

fn created<T: Serialize>(value: &T) -> Reply {
    Ok(json_response(StatusCode::CREATED, value))
}

fn principal(ctx: &Ctx) -> Result<Principal, ApiError> {
    Ok(ctx.session()?.principal.clone())
}

fn own_department(principal: &Principal) -> Result<String, ApiError> {
    principal
        .department
        .clone()
        .ok_or_else(|| Error::Unauthorized.into())
}

pub fn method_router(route: &'static Route) -> MethodRouter<AppState> {
    use Method::*;
    match (route.method, route.path) {
        (Get, "/health") => get(health),
        (Post, "/api/admin/login") => post(|s, c, b| login(AccountKind::Admin, s, c, b)),
        (Post, "/api/staff/login") => post(|s, c, b| login(AccountKind::Staff, s, c, b)),
        (Post, "/api/cadet/login") => post(|s, c, b| login(AccountKind::Cadet, s, c, b)),
        (Post, "/api/logout") => post(logout),
        (Post, "/api/staff/register") => post(register_staff),
        (Post, "/api/cadet/register") => post(register_cadet),
        (Post, "/api/password-reset/begin") => post(begin_reset),
        (Post, "/api/password-reset/complete") => post(complete_reset),
        (Get, "/api/csrf") => get(csrf),
        (Get, "/api/me") => get(me),
        (Patch, "/api/me") => patch(edit_me),
        (Post, "/api/me/password") => post(change_password),
        (Get, "/api/events") | (Get, "/api/admin/events") => get(list_events),
        (Get, "/api/admin/staff") => get(list_staff),
        (Post, "/api/admin/staff") => post(edit_staff),
        (Patch, "/api/admin/staff/{id}") => patch(patch_staff),
        (Get, "/api/admin/staff-pins") => get(|s, c| list_pins(PinRole::Staff, s, c)),
        (Post, "/api/admin/staff-pins") => post(create_staff_pins),
        (Delete, "/api/admin/staff-pins/{code}") => {
            delete(|s, c, p| delete_pin(PinRole::Staff, s, c, p))
        }
        (Post, "/api/admin/events") => post(create_event),
        (Get, "/api/hod/cadets") => get(list_cadets),
        (Post, "/api/hod/cadets") => post(edit_cadet),
        (Get, "/api/hod/cadet-pins") => get(|s, c| list_pins(PinRole::Cadet, s, c)),
        (Post, "/api/hod/cadet-pins") => post(create_cadet_pins),
        (Delete, "/api/hod/cadet-pins/{code}") => {
            delete(|s, c, p| delete_pin(PinRole::Cadet, s, c, p))
        }
        (Get, "/api/hod/npa-roster") => get(list_roster),
        (Post, "/api/hod/npa-roster") => post(upload_roster),
        (Get, "/api/hod/courses") => get(list_courses),
        (Post, "/api/hod/courses") => post(create_course),
        (Patch, "/api/hod/courses/{code}") => patch(edit_course),
        (Delete, "/api/hod/courses/{code}") => delete(delete_course),
        (Post, "/api/hod/assignments") => post(assign_course),
        (Post, "/api/hod/registration-window") => post(registration_window),
        (Get, "/api/hod/results") => get(department_results),
        (Get, "/api/lecturer/courses") => get(assigned_courses),
        (Get, "/api/lecturer/courses/{code}/cadets") => get(registered_cadets),
        (Post, "/api/lecturer/courses/{code}/scores") => post(upload_scores),
        (Post, "/api/lecturer/courses/{code}/materials") => post(upload_material),
        (Get, "/api/cadet/eligible-courses") => get(eligible_courses),
        (Post, "/api/cadet/registrations") => post(register_courses),
        (Get, "/api/cadet/results") => get(own_results),
        (Get, "/api/cadet/materials") => get(list_materials),
        (Get, "/api/cadet/materials/{id}") => get(download_material),
        (method, path) => panic!("no handler for {} {path}", method.as_str()),
    }
}

async fn health() -> Reply {
    ok(&json!({ "status": "ok" }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoginBody {
    email: String,
    password: String,
}

async fn login(
    kind: AccountKind,
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<LoginBody>,
) -> Reply {
    let sims = app.sims.clone();
    let outcome = blocking(move || {
        sims.login(
            kind,
            &body.email,
            &body.password,
            &ctx.source,
            ctx.presented_token.as_deref(),
        )
    })
    .await?;
    let ttl = app.sims.config().session.idle_ttl.num_seconds();
    let mut response = json_response(StatusCode::OK, &outcome);
    response
        .headers_mut()
        .insert(SET_COOKIE, set_cookie(&outcome.token, ttl, app.cookie));
    Ok(response)
}

async fn logout(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let session = ctx.session()?.clone();
    let sims = app.sims.clone();
    blocking(move || sims.logout(&session)).await?;
    let mut response = json_response(StatusCode::OK, &json!({ "status": "logged_out" }));
    response
        .headers_mut()
        .insert(SET_COOKIE, set_cookie("", 0, app.cookie));
    Ok(response)
}

async fn register_staff(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<StaffRegistration>,
) -> Reply {
    let staff = blocking(move || app.sims.register_staff(&body, &ctx.source)).await?;
    created(&staff)
}

async fn register_cadet(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<CadetRegistration>,
) -> Reply {
    let cadet = blocking(move || app.sims.register_cadet(&body, &ctx.source)).await?;
    created(&cadet)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BeginReset {
    kind: AccountKind,
    email: String,
}

async fn begin_reset(State(app): State<AppState>, JsonBody(body): JsonBody<BeginReset>) -> Reply {
    blocking(move || app.sims.begin_password_reset(body.kind, &body.email)).await?;
    Ok(json_response(
        StatusCode::ACCEPTED,
        &json!({ "status": "accepted" }),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompleteReset {
    token: String,
    new_password: String,
}

async fn complete_reset(
    State(app): State<AppState>,
    JsonBody(body): JsonBody<CompleteReset>,
) -> Reply {
    blocking(move || {
        app.sims
            .complete_password_reset(&body.token, &body.new_password)
    })
    .await?;
    ok(&json!({ "status": "ok" }))
}

async fn csrf(State(app): State<AppState>, ctx: Ctx) -> Reply {
    ok(&json!({ "csrf_token": app.sims.issue_csrf(ctx.session()?) }))
}

async fn me(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.view_own_profile(&p)).await?)
}

async fn edit_me(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<ProfileEdit>,
) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.edit_own_profile(&p, &body)).await?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PasswordChange {
    current_password: String,
    new_password: String,
}

async fn change_password(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<PasswordChange>,
) -> Reply {
    let session = ctx.session()?.clone();
    blocking(move || {
        app.sims
            .change_own_password(&session, &body.current_password, &body.new_password)
    })
    .await?;
    ok(&json!({ "status": "ok" }))
}

async fn list_events(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.list_events(&p)).await?)
}

async fn create_event(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<EventInput>,
) -> Reply {
    let p = principal(&ctx)?;
    created(&blocking(move || app.sims.create_event(&p, &body)).await?)
}

async fn list_staff(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.list_staff(&p)).await?)
}

async fn edit_staff(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<StaffUpdate>,
) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.edit_staff(&p, &body)).await?)
}

/// The record id comes from the path. A body `id` must agree with it.
fn with_path_id<T: serde::de::DeserializeOwned>(id: i64, mut body: Value) -> Result<T, ApiError> {
    let Some(object) = body.as_object_mut() else {
        return Err(ApiError::from(Error::Validation(
            sims_core::ValidationError::InvalidField("body"),
        )));
    };
    match object.get("id") {
        Some(existing) if existing != &json!(id) => {
            return Err(Error::Validation(sims_core::ValidationError::InvalidField("id")).into())
        }
        _ => object.insert("id".into(), json!(id)),
    };
    parse_json(&serde_json::to_vec(&body).map_err(ApiError::internal)?)
}

async fn patch_staff(
    State(app): State<AppState>,
    ctx: Ctx,
    id: Param,
    JsonBody(body): JsonBody<Value>,
) -> Reply {
    let p = principal(&ctx)?;
    let update: StaffUpdate = with_path_id(id.id()?, body)?;
    ok(&blocking(move || app.sims.edit_staff(&p, &update)).await?)
}

async fn list_pins(role: PinRole, State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.list_pins(&p, role)).await?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PinRequest {
    /// Required for staff pins; cadet pins default to the caller's department.
    department: Option<String>,
    count: u32,
}

async fn create_staff_pins(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<PinRequest>,
) -> Reply {
    let p = principal(&ctx)?;
    let department =
        body.department
            .ok_or(Error::Validation(sims_core::ValidationError::InvalidField(
                "department",
            )))?;
    created(
        &blocking(move || {
            app.sims
                .generate_pins(&p, PinRole::Staff, &department, body.count)
        })
        .await?,
    )
}

async fn create_cadet_pins(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<PinRequest>,
) -> Reply {
    let p = principal(&ctx)?;
    let department = match body.department {
        Some(d) => d,
        None => own_department(&p)?,
    };
    created(
        &blocking(move || {
            app.sims
                .generate_pins(&p, PinRole::Cadet, &department, body.count)
        })
        .await?,
    )
}

async fn delete_pin(
    role: PinRole,
    State(app): State<AppState>,
    ctx: Ctx,
    Param(code): Param,
) -> Reply {
    let p = principal(&ctx)?;
    blocking(move || app.sims.delete_pin(&p, role, &code)).await?;
    ok(&json!({ "status": "deleted" }))
}

async fn list_cadets(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.list_cadets(&p)).await?)
}

async fn edit_cadet(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<CadetUpdate>,
) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.edit_cadet(&p, &body)).await?)
}

async fn list_roster(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.list_roster(&p)).await?)
}

async fn upload_roster(State(app): State<AppState>, ctx: Ctx, TextBody(text): TextBody) -> Reply {
    let p = principal(&ctx)?;
    let department = own_department(&p)?;
    ok(&blocking(move || app.sims.upload_npa_roster(&p, &department, &text)).await?)
}

async fn list_courses(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.list_courses(&p)).await?)
}

async fn create_course(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<CourseInput>,
) -> Reply {
    let p = principal(&ctx)?;
    created(&blocking(move || app.sims.create_course(&p, &body)).await?)
}

async fn edit_course(
    State(app): State<AppState>,
    ctx: Ctx,
    Param(code): Param,
    JsonBody(body): JsonBody<CourseUpdate>,
) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.edit_course(&p, &code, &body)).await?)
}

async fn delete_course(State(app): State<AppState>, ctx: Ctx, Param(code): Param) -> Reply {
    let p = principal(&ctx)?;
    blocking(move || app.sims.delete_course(&p, &code)).await?;
    ok(&json!({ "status": "deleted" }))
}

async fn assign_course(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<AssignInput>,
) -> Reply {
    let p = principal(&ctx)?;
    created(&blocking(move || app.sims.assign_course(&p, &body)).await?)
}

async fn registration_window(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<WindowInput>,
) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.set_registration_window(&p, &body)).await?)
}

async fn department_results(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.department_results(&p)).await?)
}

async fn assigned_courses(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.list_assigned_courses(&p)).await?)
}

async fn registered_cadets(State(app): State<AppState>, ctx: Ctx, Param(code): Param) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.list_registered_cadets(&p, &code)).await?)
}

async fn upload_scores(
    State(app): State<AppState>,
    ctx: Ctx,
    Param(code): Param,
    CsvBody(csv): CsvBody,
) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.upload_scores(&p, &code, &csv)).await?)
}

fn multipart_error(err: axum::extract::multipart::MultipartError) -> ApiError {
    if err.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::payload_too_large()
    } else {
        ApiError::malformed_body("malformed multipart body")
    }
}

/// Expects one part named `file` carrying a filename.
async fn upload_material(
    State(app): State<AppState>,
    ctx: Ctx,
    Param(code): Param,
    multipart: Result<Multipart, MultipartRejection>,
) -> Reply {
    let p = principal(&ctx)?;
    let mut multipart =
        multipart.map_err(|_| ApiError::unsupported_media_type("multipart/form-data"))?;
    let mut upload = None;
    while let Some(field) = multipart.next_field().await.map_err(multipart_error)? {
        if field.name() == Some("file") {
            let filename = field.file_name().unwrap_or_default().to_owned();
            let bytes = field.bytes().await.map_err(multipart_error)?;
            upload = Some((filename, bytes));
        }
    }
    let (filename, bytes) = upload.ok_or(Error::Validation(
        sims_core::ValidationError::InvalidField("file"),
    ))?;
    created(&blocking(move || app.sims.upload_material(&p, &code, &filename, &bytes)).await?)
}

async fn eligible_courses(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.eligible_courses(&p)).await?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistrationRequest {
    course_codes: Vec<String>,
}

async fn register_courses(
    State(app): State<AppState>,
    ctx: Ctx,
    JsonBody(body): JsonBody<RegistrationRequest>,
) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.register_courses(&p, &body.course_codes)).await?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResultsQuery {
    cadet_id: Option<i64>,
}

async fn own_results(
    State(app): State<AppState>,
    ctx: Ctx,
    QueryParams(query): QueryParams<ResultsQuery>,
) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.view_results(&p, query.cadet_id)).await?)
}

async fn list_materials(State(app): State<AppState>, ctx: Ctx) -> Reply {
    let p = principal(&ctx)?;
    ok(&blocking(move || app.sims.list_materials(&p)).await?)
}

/// Streams the decrypted file as an attachment, never inline.
async fn download_material(State(app): State<AppState>, ctx: Ctx, id: Param) -> Reply {
    let p = principal(&ctx)?;
    let id = id.id()?;
    let (material, bytes) = blocking(move || app.sims.download_material(&p, id)).await?;
    let filename: String = material
        .original_filename
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_'))
        .collect();
    let disposition = HeaderValue::from_str(&format!("attachment; filename=\"{filename}\""))
        .unwrap_or_else(|_| HeaderValue::from_static("attachment"));
    Ok((
        StatusCode::OK,
        [
            (
                CONTENT_TYPE,
                HeaderValue::from_static("application/octet-stream"),
            ),
            (CONTENT_DISPOSITION, disposition),
        ],
        bytes,
    )
        .into_response())
}
