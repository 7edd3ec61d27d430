use rusqlite::OptionalExtension;

use super::{NewAdmin, Repo, StoreError};
use crate::domain::Semester;

/// Initial institution data. Applying a seed twice is a no-op: rows that
/// already exist are left untouched.
#[derive(Debug, Clone)]
pub struct Seed {
    /// `(faculty, departments)` pairs.
    pub faculties: Vec<(String, Vec<String>)>,
    pub session_year: i32,
    pub semester: Semester,
    /// Created only when the store has no administrator yet.
    pub admin: Option<NewAdmin>,
}

impl Seed {
    /// The demo institution: Computer Science under Science, Sociology
    /// under Social and Management.
    pub fn demo(session_year: i32, admin: Option<NewAdmin>) -> Self {
        Self {
            faculties: vec![
                ("Science".into(), vec!["Computer Science".into()]),
                ("Social and Management".into(), vec!["Sociology".into()]),
            ],
            session_year,
            semester: Semester::First,
            admin,
        }
    }

    pub(super) fn apply(&self, repo: &Repo<'_>) -> Result<(), StoreError> {
        for (faculty, departments) in &self.faculties {
            if matches!(repo.get_faculty(faculty), Err(StoreError::NotFound)) {
                repo.insert_faculty(faculty)?;
            }
            for department in departments {
                if matches!(repo.get_department(department), Err(StoreError::NotFound)) {
                    repo.insert_department(department, faculty)?;
                }
            }
        }
        let has_session: Option<i64> = repo
            .conn()
            .query_row(
                "SELECT 1 FROM academic_sessions WHERE year = ?1",
                [self.session_year],
                |r| r.get(0),
            )
            .optional()?;
        if has_session.is_none() {
            repo.insert_academic_session(self.session_year, self.semester, true)?;
        }
        if let Some(admin) = &self.admin {
            if repo.count_admins()? == 0 {
                repo.insert_admin(admin)?;
            }
        }
        Ok(())
    }
}
