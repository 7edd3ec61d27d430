//! Course catalogue, assignments, registration windows, course
//! registration, scores, materials and events.

use std::collections::BTreeSet;
use std::path::PathBuf;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::access::{Action, Principal, Resource};
use crate::audit_log::AuditEntry;
use crate::domain::{
    grade_of, required_text, AcademicSession, AccountKind, Course, CourseAssignment,
    CourseRegistration, Event, Grade, Level, Material, MediaKind, NpaNumber, Semester,
};
use crate::error::{Error, Result, ValidationError};
use crate::security::{random_token, SealedBlob};
use crate::service::Sims;
use crate::store::{self, NewCourse, Outcome, Repo, ResultRow, RosterRow};

const MAX_COURSE_CODE_CHARS: usize = 16;
const MAX_EVENT_BODY_CHARS: usize = 10_000;
const MAX_FILENAME_CHARS: usize = 120;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CourseInput {
    pub course_code: String,
    pub course_title: String,
    /// Defaults to the caller's department.
    #[serde(default)]
    pub dept_name: Option<String>,
    pub level: Level,
    pub unit: u32,
    pub semester: Semester,
    pub year: i32,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CourseUpdate {
    pub course_title: Option<String>,
    pub level: Option<Level>,
    pub unit: Option<u32>,
    pub semester: Option<Semester>,
    pub year: Option<i32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignInput {
    pub course_code: String,
    pub staff_id: i64,
    /// Defaults to the current session.
    #[serde(default)]
    pub session: Option<i32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowInput {
    /// Defaults to the caller's department.
    #[serde(default)]
    pub department: Option<String>,
    pub open: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventInput {
    pub title: String,
    pub body: String,
    pub event_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptedScore {
    pub line: usize,
    pub npa_number: NpaNumber,
    pub total: f64,
    pub grade: Grade,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedScore {
    pub line: usize,
    pub text: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScoreReport {
    pub accepted: Vec<AcceptedScore>,
    pub rejected: Vec<RejectedScore>,
}

/// Course codes are short tokens such as `SOC-103`.
pub fn normalize_course_code(raw: &str) -> Result<String, ValidationError> {
    let code = raw.trim().to_ascii_uppercase();
    let shaped = !code.is_empty()
        && code.len() <= MAX_COURSE_CODE_CHARS
        && code.chars().all(|c| c.is_ascii_alphanumeric() || c == '-');
    if shaped {
        Ok(code)
    } else {
        Err(ValidationError::InvalidField("course_code"))
    }
}

/// The final path component of an uploaded file name with control and
/// separator characters removed. Used only for display and download
/// headers, never as a storage path.
pub fn sanitize_filename(raw: &str, kind: MediaKind) -> String {
    let last = raw.rsplit(['/', '\\']).next().unwrap_or("");
    let cleaned: String = last
        .chars()
        .filter(|c| !c.is_control() && !matches!(c, '"' | ':' | '*' | '?' | '<' | '>' | '|'))
        .collect();
    let cleaned = cleaned.trim().trim_start_matches('.').to_owned();
    if cleaned.is_empty() {
        return format!("material.{}", kind.as_str());
    }
    let mut out: String = cleaned.chars().rev().take(MAX_FILENAME_CHARS).collect();
    out = out.chars().rev().collect();
    out
}

fn parse_total(text: &str) -> Result<f64, &'static str> {
    let total: f64 = text.trim().parse().map_err(|_| "invalid_total")?;
    if !total.is_finite() {
        return Err("invalid_total");
    }
    grade_of(total).map(|_| total).map_err(|e| e.machine_code())
}

fn own_department(principal: &Principal) -> Result<String> {
    principal.department.clone().ok_or(Error::Unauthorized)
}

impl Sims {
    fn live_course(&self, code: &str) -> Result<Course> {
        let code = normalize_course_code(code).map_err(|_| Error::NotFound)?;
        self.read(|repo| repo.live_course_by_code(&code)?.ok_or(Error::NotFound))
    }

    fn course_resource(&self, repo: &Repo<'_>, course: &Course, year: i32) -> Result<Resource> {
        let lecturer = repo.course_assignment(course.id, year)?.map(|a| a.staff_id);
        Ok(Resource::Course {
            department: course.dept_name.clone(),
            lecturer,
        })
    }

    pub fn current_session(&self) -> Result<AcademicSession> {
        self.read(|repo| Ok(repo.current_session()?))
    }

    pub fn create_course(&self, principal: &Principal, input: &CourseInput) -> Result<Course> {
        let department = match &input.dept_name {
            Some(d) => d.trim().to_owned(),
            None => own_department(principal)?,
        };
        self.authorize(
            principal,
            Action::CreateCourse,
            &Resource::Department(department.clone()),
        )?;
        let new = NewCourse {
            course_code: normalize_course_code(&input.course_code)?,
            course_title: required_text(&input.course_title, "course_title")?,
            dept_name: department,
            level: input.level,
            unit: input.unit,
            semester: input.semester,
            year: input.year,
        };
        if new.unit < 1 {
            return Err(ValidationError::InvalidField("unit").into());
        }
        self.tx(|repo| {
            let course = repo.insert_course(&new)?;
            let entry = AuditEntry::new(
                principal.actor(),
                Action::CreateCourse.as_str(),
                format!("course:{}", course.course_code),
                Outcome::Success,
            );
            self.audit(repo, &entry)?;
            Ok(course)
        })
    }

    /// Live courses of the caller's department.
    pub fn list_courses(&self, principal: &Principal) -> Result<Vec<Course>> {
        let department = own_department(principal)?;
        self.authorize(
            principal,
            Action::CreateCourse,
            &Resource::Department(department.clone()),
        )?;
        self.read(|repo| Ok(repo.list_courses(Some(&department))?))
    }

    pub fn edit_course(
        &self,
        principal: &Principal,
        code: &str,
        update: &CourseUpdate,
    ) -> Result<Course> {
        let course = self.live_course(code)?;
        self.authorize(
            principal,
            Action::EditCourse,
            &Resource::Department(course.dept_name.clone()),
        )?;
        let edit = store::CourseEdit {
            course_title: update
                .course_title
                .as_deref()
                .map(|t| required_text(t, "course_title"))
                .transpose()?,
            level: update.level,
            unit: update.unit,
            semester: update.semester,
            year: update.year,
        };
        if edit.unit == Some(0) {
            return Err(ValidationError::InvalidField("unit").into());
        }
        self.tx(|repo| {
            let saved = repo.update_course(course.id, &edit)?;
            let entry = AuditEntry::new(
                principal.actor(),
                Action::EditCourse.as_str(),
                format!("course:{}", saved.course_code),
                Outcome::Success,
            )
            .with_details(
                json!({ "title_before": course.course_title, "title_after": saved.course_title }),
            );
            self.audit(repo, &entry)?;
            Ok(saved)
        })
    }

    /// Soft delete. Registrations and scores on the course stay readable.
    pub fn delete_course(&self, principal: &Principal, code: &str) -> Result<()> {
        let course = self.live_course(code)?;
        self.authorize(
            principal,
            Action::DeleteCourse,
            &Resource::Department(course.dept_name.clone()),
        )?;
        self.tx(|repo| {
            repo.soft_delete_course(course.id)?;
            let entry = AuditEntry::new(
                principal.actor(),
                Action::DeleteCourse.as_str(),
                format!("course:{}", course.course_code),
                Outcome::Success,
            );
            Ok(self.audit(repo, &entry)?)
        })
    }

    /// Assigns a course to a lecturer or HOD of the course's department,
    /// replacing any earlier assignment for the same session.
    pub fn assign_course(
        &self,
        principal: &Principal,
        input: &AssignInput,
    ) -> Result<CourseAssignment> {
        let course = self.live_course(&input.course_code)?;
        self.authorize(
            principal,
            Action::AssignCourse,
            &Resource::Department(course.dept_name.clone()),
        )?;
        self.tx(|repo| {
            let staff = repo.get_staff(input.staff_id)?;
            if staff.department != course.dept_name {
                return Err(Error::CrossDepartment);
            }
            if staff.designation.is_none() {
                return Err(ValidationError::InvalidField("staff_id").into());
            }
            let year = match input.session {
                Some(y) => y,
                None => repo.current_session()?.year,
            };
            let assignment = repo.assign_course(course.id, year, staff.id)?;
            let entry = AuditEntry::new(
                principal.actor(),
                Action::AssignCourse.as_str(),
                format!("course:{}", course.course_code),
                Outcome::Success,
            )
            .with_details(json!({ "staff_id": staff.id, "session": year }));
            self.audit(repo, &entry)?;
            Ok(assignment)
        })
    }

    pub fn set_registration_window(
        &self,
        principal: &Principal,
        input: &WindowInput,
    ) -> Result<AcademicSession> {
        let department = match &input.department {
            Some(d) => d.trim().to_owned(),
            None => own_department(principal)?,
        };
        self.authorize(
            principal,
            Action::OpenRegistration,
            &Resource::Department(department.clone()),
        )?;
        self.tx(|repo| {
            repo.live_department(&department)?;
            let year = repo.current_session()?.year;
            repo.set_registration_window(year, &department, input.open)?;
            let entry = AuditEntry::new(
                principal.actor(),
                Action::OpenRegistration.as_str(),
                department.clone(),
                Outcome::Success,
            )
            .with_details(json!({ "open": input.open, "session": year }));
            self.audit(repo, &entry)?;
            Ok(repo.current_session()?)
        })
    }

    fn eligible_for(
        &self,
        repo: &Repo<'_>,
        cadet_id: i64,
    ) -> Result<(AcademicSession, Vec<Course>)> {
        let cadet = repo.get_cadet(cadet_id)?;
        let session = repo.current_session()?;
        let courses = repo.eligible_courses(
            &cadet.department,
            cadet.level,
            session.current_semester,
            session.year,
        )?;
        Ok((session, courses))
    }

    fn own_cadet(&self, principal: &Principal, action: Action) -> Result<i64> {
        let department = own_department(principal)?;
        let id = principal.account.id;
        self.authorize(principal, action, &Resource::Cadet { id, department })?;
        if principal.account.kind != AccountKind::Cadet {
            return Err(Error::Unauthorized);
        }
        Ok(id)
    }

    /// Live courses of the cadet's department and level for the current
    /// semester and year.
    pub fn eligible_courses(&self, principal: &Principal) -> Result<Vec<Course>> {
        let id = self.own_cadet(principal, Action::ViewEligibleCourses)?;
        self.read(|repo| Ok(self.eligible_for(repo, id)?.1))
    }

    /// Registers the caller for every listed course, or for none of them.
    /// Already-held registrations are returned unchanged.
    pub fn register_courses(
        &self,
        principal: &Principal,
        codes: &[String],
    ) -> Result<Vec<CourseRegistration>> {
        let id = self.own_cadet(principal, Action::RegisterCourses)?;
        let department = own_department(principal)?;
        self.tx(|repo| {
            let (session, eligible) = self.eligible_for(repo, id)?;
            if !session.is_open_for(&department) {
                return Err(Error::RegistrationClosed);
            }
            let mut wanted = BTreeSet::new();
            for raw in codes {
                let code = normalize_course_code(raw).map_err(|_| Error::IneligibleCourse(raw.trim().to_owned()))?;
                let course = eligible
                    .iter()
                    .find(|c| c.course_code == code)
                    .ok_or_else(|| Error::IneligibleCourse(code.clone()))?;
                wanted.insert((course.course_code.clone(), course.id));
            }
            let mut out = Vec::with_capacity(wanted.len());
            for (_, course_id) in &wanted {
                out.push(repo.register_course(id, *course_id, session.year)?);
            }
            let entry = AuditEntry::new(
                principal.actor(),
                Action::RegisterCourses.as_str(),
                principal.actor(),
                Outcome::Success,
            )
            .with_details(json!({ "courses": wanted.iter().map(|(c, _)| c).collect::<Vec<_>>(), "session": session.year }));
            self.audit(repo, &entry)?;
            Ok(out)
        })
    }

    /// Courses assigned to the calling staff member in the current session.
    pub fn list_assigned_courses(&self, principal: &Principal) -> Result<Vec<Course>> {
        self.authorize(principal, Action::ListAssignedCourses, &Resource::Any)?;
        if principal.account.kind != AccountKind::Staff {
            return Err(Error::Unauthorized);
        }
        self.read(|repo| {
            let year = repo.current_session()?.year;
            Ok(repo.assigned_courses(principal.account.id, year)?)
        })
    }

    pub fn list_registered_cadets(
        &self,
        principal: &Principal,
        code: &str,
    ) -> Result<Vec<RosterRow>> {
        let course = self.live_course(code)?;
        let (resource, year) = self.read(|repo| {
            let year = repo.current_session()?.year;
            Ok((self.course_resource(repo, &course, year)?, year))
        })?;
        self.authorize(principal, Action::ListRegisteredCadets, &resource)?;
        self.read(|repo| Ok(repo.registered_cadets(course.id, year)?))
    }

    /// Upserts scores from CSV with header `npa_number,total`. Rows are
    /// judged one at a time; accepted rows land even when others fail.
    /// Overwritten totals are kept in the audit record.
    pub fn upload_scores(
        &self,
        principal: &Principal,
        code: &str,
        csv_text: &str,
    ) -> Result<ScoreReport> {
        let course = self.live_course(code)?;
        let (resource, year) = self.read(|repo| {
            let year = repo.current_session()?.year;
            Ok((self.course_resource(repo, &course, year)?, year))
        })?;
        self.authorize(principal, Action::UploadScores, &resource)?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(csv_text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|_| ValidationError::InvalidField("csv"))?
            .clone();
        if headers.len() != 2 || &headers[0] != "npa_number" || &headers[1] != "total" {
            return Err(ValidationError::InvalidField("csv_header").into());
        }
        let rows: Vec<(usize, Result<csv::StringRecord, csv::Error>)> = reader
            .records()
            .enumerate()
            .map(|(i, r)| (i + 2, r))
            .collect();
        self.tx(|repo| {
            let mut report = ScoreReport::default();
            let mut changes = Vec::new();
            for (line, record) in rows {
                let reject = |text: String, reason| RejectedScore {
                    line,
                    text: text.chars().take(64).collect(),
                    reason,
                };
                let record = match record {
                    Ok(r) if r.len() == 2 => r,
                    Ok(r) => {
                        report.rejected.push(reject(
                            r.iter().collect::<Vec<_>>().join(","),
                            "invalid_row",
                        ));
                        continue;
                    }
                    Err(_) => {
                        report.rejected.push(reject(String::new(), "invalid_row"));
                        continue;
                    }
                };
                let text = format!("{},{}", &record[0], &record[1]);
                let npa = match NpaNumber::parse(&record[0]) {
                    Ok(n) => n,
                    Err(e) => {
                        report.rejected.push(reject(text, e.machine_code()));
                        continue;
                    }
                };
                let total = match parse_total(&record[1]) {
                    Ok(t) => t,
                    Err(reason) => {
                        report.rejected.push(reject(text, reason));
                        continue;
                    }
                };
                let Some(registration) = repo.registration_by_npa(course.id, year, &npa)? else {
                    report.rejected.push(reject(text, "not_registered"));
                    continue;
                };
                let (score, prior) =
                    repo.upsert_score(registration, total, principal.account.id)?;
                changes.push(json!({ "npa_number": npa.as_str(), "prior": prior, "total": total }));
                report.accepted.push(AcceptedScore {
                    line,
                    npa_number: npa,
                    total,
                    grade: score.grade,
                });
            }
            let entry = AuditEntry::new(
                principal.actor(),
                Action::UploadScores.as_str(),
                format!("course:{}", course.course_code),
                Outcome::Success,
            )
            .with_details(
                json!({ "session": year, "changes": changes, "rejected": report.rejected.len() }),
            );
            self.audit(repo, &entry)?;
            Ok(report)
        })
    }

    /// Results of `cadet_id`, defaulting to the caller. Cadets may only
    /// read their own.
    pub fn view_results(
        &self,
        principal: &Principal,
        cadet_id: Option<i64>,
    ) -> Result<Vec<ResultRow>> {
        let target = cadet_id.unwrap_or(principal.account.id);
        let department = self.read(|repo| match repo.get_cadet(target) {
            Ok(c) => Ok(Some(c.department)),
            Err(store::StoreError::NotFound) => Ok(None),
            Err(e) => Err(e.into()),
        })?;
        let resource = Resource::Cadet {
            id: target,
            department: department.clone().unwrap_or_default(),
        };
        self.authorize(principal, Action::ViewOwnResults, &resource)?;
        if department.is_none() {
            return Err(Error::NotFound);
        }
        self.read(|repo| Ok(repo.results_of(target)?))
    }

    pub fn department_results(&self, principal: &Principal) -> Result<Vec<ResultRow>> {
        let department = own_department(principal)?;
        self.authorize(
            principal,
            Action::ViewDepartmentResults,
            &Resource::Department(department.clone()),
        )?;
        self.read(|repo| Ok(repo.department_results(&department)?))
    }

    fn material_path(&self, stored_name: &str) -> PathBuf {
        self.config().upload_dir.join(stored_name)
    }

    /// Stores a course material sealed under the service key. The file on
    /// disk has a random name; the uploaded name is kept only as metadata.
    pub fn upload_material(
        &self,
        principal: &Principal,
        code: &str,
        filename: &str,
        content: &[u8],
    ) -> Result<Material> {
        let course = self.live_course(code)?;
        let resource = self.read(|repo| {
            let year = repo.current_session()?.year;
            self.course_resource(repo, &course, year)
        })?;
        self.authorize(principal, Action::UploadMaterial, &resource)?;
        if content.len() as u64 > self.config().max_upload_bytes {
            return Err(Error::FileTooLarge);
        }
        let kind = MediaKind::detect(filename, content).ok_or(Error::DisallowedType)?;
        let original = sanitize_filename(filename, kind);
        let stored_name = format!("{}.bin", random_token());
        let sealed = SealedBlob::seal(
            &self.config().encryption_key,
            content,
            stored_name.as_bytes(),
        );
        let path = self.material_path(&stored_name);
        std::fs::write(&path, sealed.to_bytes()).map_err(Error::internal)?;
        let saved = self.tx(|repo| {
            let material = repo.insert_material(
                course.id,
                &original,
                &stored_name,
                content.len() as u64,
                kind,
                principal.account.id,
            )?;
            let entry = AuditEntry::new(
                principal.actor(),
                Action::UploadMaterial.as_str(),
                format!("material:{}", material.id),
                Outcome::Success,
            )
            .with_details(json!({ "course": course.course_code, "size": content.len() }));
            self.audit(repo, &entry)?;
            Ok(material)
        });
        if saved.is_err() {
            let _ = std::fs::remove_file(&path);
        }
        saved
    }

    /// Materials of every course the calling cadet is registered for.
    pub fn list_materials(&self, principal: &Principal) -> Result<Vec<Material>> {
        let id = self.own_cadet(principal, Action::DownloadMaterials)?;
        self.read(|repo| Ok(repo.materials_for_cadet(id)?))
    }

    /// Decrypts and returns a material for a cadet registered on its course.
    pub fn download_material(
        &self,
        principal: &Principal,
        material_id: i64,
    ) -> Result<(Material, Vec<u8>)> {
        let (material, registered) = self.read(|repo| {
            let material = match repo.get_material(material_id) {
                Ok(m) => Some(m),
                Err(store::StoreError::NotFound) => None,
                Err(e) => return Err(e.into()),
            };
            let registered = match (&material, principal.account.kind) {
                (Some(m), AccountKind::Cadet) => {
                    repo.is_registered(principal.account.id, m.course_id)?
                }
                _ => false,
            };
            Ok((material, registered))
        })?;
        self.authorize(
            principal,
            Action::DownloadMaterials,
            &Resource::Material {
                cadet_registered: registered,
            },
        )?;
        let material = material.ok_or(Error::NotFound)?;
        let bytes =
            std::fs::read(self.material_path(&material.stored_name)).map_err(Error::internal)?;
        let blob = SealedBlob::from_bytes(&bytes).map_err(|_| Error::IntegrityFailure)?;
        let plain = blob
            .open(
                &self.config().encryption_key,
                material.stored_name.as_bytes(),
            )
            .map_err(|_| Error::IntegrityFailure)?;
        Ok((material, plain))
    }

    pub fn create_event(&self, principal: &Principal, input: &EventInput) -> Result<Event> {
        self.authorize(principal, Action::CreateEvent, &Resource::Any)?;
        let title = required_text(&input.title, "title")?;
        let body = input.body.trim();
        if body.is_empty() || body.chars().count() > MAX_EVENT_BODY_CHARS || body.contains('\0') {
            return Err(ValidationError::InvalidField("body").into());
        }
        self.tx(|repo| {
            let event = repo.insert_event(&title, body, input.event_date, principal.account.id)?;
            let entry = AuditEntry::new(
                principal.actor(),
                Action::CreateEvent.as_str(),
                format!("event:{}", event.id),
                Outcome::Success,
            );
            self.audit(repo, &entry)?;
            Ok(event)
        })
    }

    /// Every event, newest first.
    pub fn list_events(&self, principal: &Principal) -> Result<Vec<Event>> {
        self.authorize(principal, Action::ListEvents, &Resource::Any)?;
        self.read(|repo| Ok(repo.list_events()?))
    }
}
