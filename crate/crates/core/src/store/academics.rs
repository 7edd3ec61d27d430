use std::collections::BTreeMap;

use chrono::NaiveDate;
use rusqlite::{params, OptionalExtension, Row};
use serde::Serialize;

use super::accounts::level_col;
use super::{from_millis, parse_col, Repo, StoreError};
use crate::domain::{
    grade_of, AcademicSession, Course, CourseAssignment, CourseRegistration, Event, Grade, Level,
    Material, MediaKind, NpaNumber, Score, Semester,
};

#[derive(Debug, Clone, PartialEq)]
pub struct NewCourse {
    pub course_code: String,
    pub course_title: String,
    pub dept_name: String,
    pub level: Level,
    pub unit: u32,
    pub semester: Semester,
    pub year: i32,
}

/// Replacement values for a course's mutable columns.
#[derive(Debug, Clone, Default)]
pub struct CourseEdit {
    pub course_title: Option<String>,
    pub level: Option<Level>,
    pub unit: Option<u32>,
    pub semester: Option<Semester>,
    pub year: Option<i32>,
}

/// One cadet registered for a course, with the score if uploaded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RosterRow {
    pub cadet_id: i64,
    pub npa_number: NpaNumber,
    pub sur_name: String,
    pub first_name: String,
    pub level: Level,
    pub total: Option<f64>,
    pub grade: Option<Grade>,
}

/// One registration with its score, or pending when no score exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub cadet_id: i64,
    pub npa_number: NpaNumber,
    pub course_code: String,
    pub course_title: String,
    pub unit: u32,
    pub session: i32,
    pub semester: Semester,
    pub total: Option<f64>,
    pub grade: Option<Grade>,
}

const COURSE_COLUMNS: &str =
    "id, course_code, course_title, dept_name, level, unit, semester, year,
    created_at, updated_at, deleted_at FROM courses";

fn course_from_row(row: &Row<'_>) -> rusqlite::Result<Course> {
    let semester: String = row.get(6)?;
    Ok(Course {
        id: row.get(0)?,
        course_code: row.get(1)?,
        course_title: row.get(2)?,
        dept_name: row.get(3)?,
        level: level_col(4, row.get(4)?)?,
        unit: row.get(5)?,
        semester: parse_col(6, &semester, str::parse::<Semester>)?,
        year: row.get(7)?,
        created_at: from_millis(row.get(8)?),
        updated_at: from_millis(row.get(9)?),
        deleted_at: row.get::<_, Option<i64>>(10)?.map(from_millis),
    })
}

fn grade_col(idx: usize, total: Option<f64>) -> rusqlite::Result<Option<Grade>> {
    total
        .map(|t| {
            grade_of(t).map_err(|e| {
                rusqlite::Error::FromSqlConversionFailure(
                    idx,
                    rusqlite::types::Type::Real,
                    Box::new(e),
                )
            })
        })
        .transpose()
}

const MATERIAL_COLUMNS: &str =
    "m.id, m.course_id, c.course_code, m.original_filename, m.stored_name,
    m.size_bytes, m.media_kind, m.uploaded_by, m.created_at, m.updated_at
    FROM materials m JOIN courses c ON c.id = m.course_id";

fn material_from_row(row: &Row<'_>) -> rusqlite::Result<Material> {
    let kind: String = row.get(6)?;
    Ok(Material {
        id: row.get(0)?,
        course_id: row.get(1)?,
        course_code: row.get(2)?,
        original_filename: row.get(3)?,
        stored_name: row.get(4)?,
        size_bytes: row.get(5)?,
        media_kind: parse_col(6, &kind, str::parse::<MediaKind>)?,
        uploaded_by: row.get(7)?,
        created_at: from_millis(row.get(8)?),
        updated_at: from_millis(row.get(9)?),
    })
}

const REGISTRATION_COLUMNS: &str = "r.id, r.cadet_id, r.course_id, c.course_code, r.session_year,
    c.semester, r.created_at, r.updated_at
    FROM course_registrations r JOIN courses c ON c.id = r.course_id";

fn registration_from_row(row: &Row<'_>) -> rusqlite::Result<CourseRegistration> {
    let semester: String = row.get(5)?;
    Ok(CourseRegistration {
        id: row.get(0)?,
        cadet_id: row.get(1)?,
        course_id: row.get(2)?,
        course_code: row.get(3)?,
        session: row.get(4)?,
        semester: parse_col(5, &semester, str::parse::<Semester>)?,
        created_at: from_millis(row.get(6)?),
        updated_at: from_millis(row.get(7)?),
    })
}

const RESULT_COLUMNS: &str = "r.cadet_id, k.npa_number, c.course_code, c.course_title, c.unit,
    r.session_year, c.semester, s.total
    FROM course_registrations r
    JOIN courses c ON c.id = r.course_id
    JOIN cadets k ON k.id = r.cadet_id
    LEFT JOIN scores s ON s.registration_id = r.id";

fn result_from_row(row: &Row<'_>) -> rusqlite::Result<ResultRow> {
    let npa: String = row.get(1)?;
    let semester: String = row.get(6)?;
    let total: Option<f64> = row.get(7)?;
    Ok(ResultRow {
        cadet_id: row.get(0)?,
        npa_number: parse_col(1, &npa, NpaNumber::parse)?,
        course_code: row.get(2)?,
        course_title: row.get(3)?,
        unit: row.get(4)?,
        session: row.get(5)?,
        semester: parse_col(6, &semester, str::parse::<Semester>)?,
        total,
        grade: grade_col(7, total)?,
    })
}

impl Repo<'_> {
    pub fn insert_course(&self, new: &NewCourse) -> Result<Course, StoreError> {
        if new.unit < 1 {
            return Err(StoreError::CheckViolation("courses.unit".into()));
        }
        self.live_department(&new.dept_name)?;
        self.conn.execute(
            "INSERT INTO courses (course_code, course_title, dept_name, level, unit, semester, year,
                                  created_at, updated_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?8)",
            params![
                new.course_code,
                new.course_title,
                new.dept_name,
                new.level.value(),
                new.unit,
                new.semester.as_str(),
                new.year,
                self.now_ms()
            ],
        )?;
        self.get_course(self.conn.last_insert_rowid())
    }

    /// Any course row by surrogate id, deleted or not.
    pub fn get_course(&self, id: i64) -> Result<Course, StoreError> {
        Ok(self.conn.query_row(
            &format!("SELECT {COURSE_COLUMNS} WHERE id = ?1"),
            [id],
            course_from_row,
        )?)
    }

    pub fn live_course_by_code(&self, code: &str) -> Result<Option<Course>, StoreError> {
        Ok(self
            .conn
            .query_row(
                &format!("SELECT {COURSE_COLUMNS} WHERE course_code = ?1 AND deleted_at IS NULL"),
                [code],
                course_from_row,
            )
            .optional()?)
    }

    /// Live courses, optionally restricted to one department.
    pub fn list_courses(&self, department: Option<&str>) -> Result<Vec<Course>, StoreError> {
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {COURSE_COLUMNS} WHERE deleted_at IS NULL AND (?1 IS NULL OR dept_name = ?1)
             ORDER BY course_code"
        ))?;
        let rows = stmt
            .query_map([department], course_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    /// Every course row including soft-deleted history.
    pub fn list_all_courses(&self) -> Result<Vec<Course>, StoreError> {
        let mut stmt = self
            .conn
            .prepare(&format!("SELECT {COURSE_COLUMNS} ORDER BY id"))?;
        let rows = stmt
            .query_map([], course_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    pub fn update_course(&self, id: i64, edit: &CourseEdit) -> Result<Course, StoreError> {
        let current = self.get_course(id)?;
        if current.deleted_at.is_some() {
            return Err(StoreError::NotFound);
        }
        let unit = edit.unit.unwrap_or(current.unit);
        if unit < 1 {
            return Err(StoreError::CheckViolation("courses.unit".into()));
        }
        self.conn.execute(
            "UPDATE courses SET course_title = ?2, level = ?3, unit = ?4, semester = ?5, year = ?6,
                 updated_at = ?7
             WHERE id = ?1",
            params![
                id,
                edit.course_title.as_ref().unwrap_or(&current.course_title),
                edit.level.unwrap_or(current.level).value(),
                unit,
                edit.semester.unwrap_or(current.semester).as_str(),
                edit.year.unwrap_or(current.year),
                self.now_ms()
            ],
        )?;
        self.get_course(id)
    }

    pub fn soft_delete_course(&self, id: i64) -> Result<(), StoreError> {
        let n = self.conn.execute(
            "UPDATE courses SET deleted_at = ?2, updated_at = ?2 WHERE id = ?1 AND deleted_at IS NULL",
            params![id, self.now_ms()],
        )?;
        if n == 0 {
            return Err(StoreError::NotFound);
        }
        Ok(())
    }

    /// Live courses matching a cadet's department, level, and the current
    /// semester and year.
    pub fn eligible_courses(
        &self,
        department: &str,
        level: Level,
        semester: Semester,
        year: i32,
    ) -> Result<Vec<Course>, StoreError> {
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {COURSE_COLUMNS}
             WHERE deleted_at IS NULL AND dept_name = ?1 AND level = ?2 AND semester = ?3 AND year = ?4
             ORDER BY course_code"
        ))?;
        let rows = stmt
            .query_map(
                params![department, level.value(), semester.as_str(), year],
                course_from_row,
            )?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    pub fn insert_academic_session(
        &self,
        year: i32,
        semester: Semester,
        current: bool,
    ) -> Result<(), StoreError> {
        if current {
            self.conn.execute(
                "UPDATE academic_sessions SET is_current = 0 WHERE is_current = 1",
                [],
            )?;
        }
        self.conn.execute(
            "INSERT INTO academic_sessions (year, current_semester, is_current, created_at, updated_at)
             VALUES (?1, ?2, ?3, ?4, ?4)",
            params![year, semester.as_str(), current, self.now_ms()],
        )?;
        Ok(())
    }

    pub fn set_current_semester(&self, year: i32, semester: Semester) -> Result<(), StoreError> {
        let n = self.conn.execute(
            "UPDATE academic_sessions SET current_semester = ?2, updated_at = ?3 WHERE year = ?1",
            params![year, semester.as_str(), self.now_ms()],
        )?;
        if n == 0 {
            return Err(StoreError::NotFound);
        }
        Ok(())
    }

    /// The current session with the window flag of every live department.
    pub fn current_session(&self) -> Result<AcademicSession, StoreError> {
        let (year, semester): (i32, String) = self.conn.query_row(
            "SELECT year, current_semester FROM academic_sessions WHERE is_current = 1",
            [],
            |r| Ok((r.get(0)?, r.get(1)?)),
        )?;
        let current_semester = semester
            .parse::<Semester>()
            .map_err(|_| StoreError::Corrupt("academic_sessions.current_semester".into()))?;
        let mut stmt = self.conn.prepare(
            "SELECT d.name, COALESCE(w.open, 0) FROM departments d
             LEFT JOIN registration_windows w ON w.department = d.name AND w.session_year = ?1
             WHERE d.deleted_at IS NULL",
        )?;
        let registration_open = stmt
            .query_map([year], |r| {
                Ok((r.get::<_, String>(0)?, r.get::<_, bool>(1)?))
            })?
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        Ok(AcademicSession {
            year,
            current_semester,
            registration_open,
        })
    }

    pub fn set_registration_window(
        &self,
        year: i32,
        department: &str,
        open: bool,
    ) -> Result<(), StoreError> {
        self.conn.execute(
            "INSERT INTO registration_windows (session_year, department, open, updated_at)
             VALUES (?1, ?2, ?3, ?4)
             ON CONFLICT (session_year, department) DO UPDATE SET open = ?3, updated_at = ?4",
            params![year, department, open, self.now_ms()],
        )?;
        Ok(())
    }

    /// Creates or replaces the assignment for `(course, session)`.
    pub fn assign_course(
        &self,
        course_id: i64,
        year: i32,
        staff_id: i64,
    ) -> Result<CourseAssignment, StoreError> {
        self.conn.execute(
            "INSERT INTO course_assignments (course_id, session_year, staff_id, created_at, updated_at)
             VALUES (?1, ?2, ?3, ?4, ?4)
             ON CONFLICT (course_id, session_year) DO UPDATE SET staff_id = ?3, updated_at = ?4",
            params![course_id, year, staff_id, self.now_ms()],
        )?;
        self.course_assignment(course_id, year)?
            .ok_or(StoreError::NotFound)
    }

    pub fn course_assignment(
        &self,
        course_id: i64,
        year: i32,
    ) -> Result<Option<CourseAssignment>, StoreError> {
        Ok(self
            .conn
            .query_row(
                "SELECT a.course_id, c.course_code, a.staff_id, a.session_year, a.created_at, a.updated_at
                 FROM course_assignments a JOIN courses c ON c.id = a.course_id
                 WHERE a.course_id = ?1 AND a.session_year = ?2",
                params![course_id, year],
                |r| {
                    Ok(CourseAssignment {
                        course_id: r.get(0)?,
                        course_code: r.get(1)?,
                        staff_id: r.get(2)?,
                        session: r.get(3)?,
                        created_at: from_millis(r.get(4)?),
                        updated_at: from_millis(r.get(5)?),
                    })
                },
            )
            .optional()?)
    }

    /// Live courses assigned to `staff_id` in session `year`.
    pub fn assigned_courses(&self, staff_id: i64, year: i32) -> Result<Vec<Course>, StoreError> {
        let mut stmt = self.conn.prepare(
            "SELECT c.id, c.course_code, c.course_title, c.dept_name, c.level, c.unit, c.semester,
                    c.year, c.created_at, c.updated_at, c.deleted_at
             FROM course_assignments a JOIN courses c ON c.id = a.course_id
             WHERE a.staff_id = ?1 AND a.session_year = ?2 AND c.deleted_at IS NULL
             ORDER BY c.course_code",
        )?;
        let rows = stmt
            .query_map(params![staff_id, year], course_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    /// Inserts the registration unless it already exists. Returns the row
    /// either way.
    pub fn register_course(
        &self,
        cadet_id: i64,
        course_id: i64,
        year: i32,
    ) -> Result<CourseRegistration, StoreError> {
        self.conn.execute(
            "INSERT INTO course_registrations (cadet_id, course_id, session_year, created_at, updated_at)
             VALUES (?1, ?2, ?3, ?4, ?4)
             ON CONFLICT (cadet_id, course_id, session_year) DO NOTHING",
            params![cadet_id, course_id, year, self.now_ms()],
        )?;
        Ok(self.conn.query_row(
            &format!(
                "SELECT {REGISTRATION_COLUMNS}
                 WHERE r.cadet_id = ?1 AND r.course_id = ?2 AND r.session_year = ?3"
            ),
            params![cadet_id, course_id, year],
            registration_from_row,
        )?)
    }

    pub fn registrations_of(&self, cadet_id: i64) -> Result<Vec<CourseRegistration>, StoreError> {
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {REGISTRATION_COLUMNS} WHERE r.cadet_id = ?1 ORDER BY r.session_year, c.course_code"
        ))?;
        let rows = stmt
            .query_map([cadet_id], registration_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    pub fn is_registered(&self, cadet_id: i64, course_id: i64) -> Result<bool, StoreError> {
        let hit: Option<i64> = self
            .conn
            .query_row(
                "SELECT 1 FROM course_registrations WHERE cadet_id = ?1 AND course_id = ?2 LIMIT 1",
                params![cadet_id, course_id],
                |r| r.get(0),
            )
            .optional()?;
        Ok(hit.is_some())
    }

    /// Cadets registered for `(course, session)`, joined with any score.
    pub fn registered_cadets(
        &self,
        course_id: i64,
        year: i32,
    ) -> Result<Vec<RosterRow>, StoreError> {
        let mut stmt = self.conn.prepare(
            "SELECT k.id, k.npa_number, k.sur_name, k.first_name, k.level, s.total
             FROM course_registrations r
             JOIN cadets k ON k.id = r.cadet_id
             LEFT JOIN scores s ON s.registration_id = r.id
             WHERE r.course_id = ?1 AND r.session_year = ?2
             ORDER BY k.npa_number",
        )?;
        let rows = stmt
            .query_map(params![course_id, year], |r| {
                let npa: String = r.get(1)?;
                let total: Option<f64> = r.get(5)?;
                Ok(RosterRow {
                    cadet_id: r.get(0)?,
                    npa_number: parse_col(1, &npa, NpaNumber::parse)?,
                    sur_name: r.get(2)?,
                    first_name: r.get(3)?,
                    level: level_col(4, r.get(4)?)?,
                    total,
                    grade: grade_col(5, total)?,
                })
            })?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    /// Registration id for the cadet holding `npa` on `(course, session)`.
    pub fn registration_by_npa(
        &self,
        course_id: i64,
        year: i32,
        npa: &NpaNumber,
    ) -> Result<Option<i64>, StoreError> {
        Ok(self
            .conn
            .query_row(
                "SELECT r.id FROM course_registrations r JOIN cadets k ON k.id = r.cadet_id
                 WHERE r.course_id = ?1 AND r.session_year = ?2 AND k.npa_number = ?3",
                params![course_id, year, npa.as_str()],
                |r| r.get(0),
            )
            .optional()?)
    }

    /// Inserts or overwrites a score. Returns the new score and the prior
    /// total, if any.
    pub fn upsert_score(
        &self,
        registration_id: i64,
        total: f64,
        uploaded_by: i64,
    ) -> Result<(Score, Option<f64>), StoreError> {
        let prior: Option<f64> = self
            .conn
            .query_row(
                "SELECT total FROM scores WHERE registration_id = ?1",
                [registration_id],
                |r| r.get(0),
            )
            .optional()?;
        self.conn.execute(
            "INSERT INTO scores (registration_id, total, uploaded_by, created_at, updated_at)
             VALUES (?1, ?2, ?3, ?4, ?4)
             ON CONFLICT (registration_id) DO UPDATE SET total = ?2, uploaded_by = ?3, updated_at = ?4",
            params![registration_id, total, uploaded_by, self.now_ms()],
        )?;
        Ok((self.get_score(registration_id)?, prior))
    }

    pub fn get_score(&self, registration_id: i64) -> Result<Score, StoreError> {
        Ok(self.conn.query_row(
            "SELECT s.registration_id, r.cadet_id, c.course_code, r.session_year, c.semester,
                    s.total, s.uploaded_by, s.created_at, s.updated_at
             FROM scores s
             JOIN course_registrations r ON r.id = s.registration_id
             JOIN courses c ON c.id = r.course_id
             WHERE s.registration_id = ?1",
            [registration_id],
            |r| {
                let semester: String = r.get(4)?;
                let total: f64 = r.get(5)?;
                Ok(Score {
                    registration_id: r.get(0)?,
                    cadet_id: r.get(1)?,
                    course_code: r.get(2)?,
                    session: r.get(3)?,
                    semester: parse_col(4, &semester, str::parse::<Semester>)?,
                    total,
                    grade: grade_col(5, Some(total))?.unwrap_or(Grade::F),
                    uploaded_by: r.get(6)?,
                    created_at: from_millis(r.get(7)?),
                    updated_at: from_millis(r.get(8)?),
                })
            },
        )?)
    }

    /// Every registration of one cadet with score or pending.
    pub fn results_of(&self, cadet_id: i64) -> Result<Vec<ResultRow>, StoreError> {
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {RESULT_COLUMNS} WHERE r.cadet_id = ?1 ORDER BY r.session_year, c.course_code"
        ))?;
        let rows = stmt
            .query_map([cadet_id], result_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    /// Every registration on courses owned by `department`.
    pub fn department_results(&self, department: &str) -> Result<Vec<ResultRow>, StoreError> {
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {RESULT_COLUMNS} WHERE c.dept_name = ?1
             ORDER BY r.session_year, c.course_code, k.npa_number"
        ))?;
        let rows = stmt
            .query_map([department], result_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    pub fn insert_material(
        &self,
        course_id: i64,
        original_filename: &str,
        stored_name: &str,
        size_bytes: u64,
        kind: MediaKind,
        uploaded_by: i64,
    ) -> Result<Material, StoreError> {
        self.conn.execute(
            "INSERT INTO materials (course_id, original_filename, stored_name, size_bytes, media_kind,
                                    uploaded_by, created_at, updated_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?7)",
            params![course_id, original_filename, stored_name, size_bytes, kind.as_str(), uploaded_by, self.now_ms()],
        )?;
        self.get_material(self.conn.last_insert_rowid())
    }

    pub fn get_material(&self, id: i64) -> Result<Material, StoreError> {
        Ok(self.conn.query_row(
            &format!("SELECT {MATERIAL_COLUMNS} WHERE m.id = ?1"),
            [id],
            material_from_row,
        )?)
    }

    /// Materials on every course the cadet has registered for.
    pub fn materials_for_cadet(&self, cadet_id: i64) -> Result<Vec<Material>, StoreError> {
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {MATERIAL_COLUMNS}
             WHERE m.course_id IN (SELECT course_id FROM course_registrations WHERE cadet_id = ?1)
             ORDER BY m.id"
        ))?;
        let rows = stmt
            .query_map([cadet_id], material_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    pub fn insert_event(
        &self,
        title: &str,
        body: &str,
        date: NaiveDate,
        created_by: i64,
    ) -> Result<Event, StoreError> {
        self.conn.execute(
            "INSERT INTO events (title, body, event_date, created_by, created_at, updated_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?5)",
            params![title, body, date.to_string(), created_by, self.now_ms()],
        )?;
        let id = self.conn.last_insert_rowid();
        self.list_events()?
            .into_iter()
            .find(|e| e.id == id)
            .ok_or(StoreError::NotFound)
    }

    /// Newest first; ties broken by id so the order is total.
    pub fn list_events(&self) -> Result<Vec<Event>, StoreError> {
        let mut stmt = self.conn.prepare(
            "SELECT id, title, body, event_date, created_by, created_at, updated_at FROM events
             ORDER BY created_at DESC, id DESC",
        )?;
        let rows = stmt
            .query_map([], |r| {
                let date: String = r.get(3)?;
                Ok(Event {
                    id: r.get(0)?,
                    title: r.get(1)?,
                    body: r.get(2)?,
                    event_date: parse_col(3, &date, |d| d.parse::<NaiveDate>())?,
                    created_by: r.get(4)?,
                    created_at: from_millis(r.get(5)?),
                    updated_at: from_millis(r.get(6)?),
                })
            })?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }
}
