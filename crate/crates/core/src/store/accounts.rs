use rusqlite::{params, OptionalExtension, Row};

use super::{from_millis, parse_col, Repo, StoreError};
use crate::domain::{
    AccountKind, Admin, Cadet, Department, Designation, Faculty, Level, NpaNumber, PersonalDetails,
    Semester, Sex, Staff, DEFAULT_PASSPORT,
};

#[derive(Debug, Clone)]
pub struct NewAdmin {
    pub name: String,
    pub email: String,
    pub password_hash: String,
}

#[derive(Debug, Clone)]
pub struct NewStaff {
    pub sur_name: String,
    pub first_name: String,
    pub department: String,
    pub pin: String,
    pub email: String,
    pub password_hash: String,
}

#[derive(Debug, Clone)]
pub struct NewCadet {
    pub sur_name: String,
    pub first_name: String,
    pub middle_name: Option<String>,
    pub npa_number: NpaNumber,
    pub pin: String,
    pub email: String,
    pub rc: u32,
    pub department: String,
    pub level: Level,
    pub semester: Semester,
    pub squad: u32,
    pub sex: Sex,
    pub personal: PersonalDetails,
    pub password_hash: String,
}

/// Fields an administrator may change on a staff record.
#[derive(Debug, Clone, Default)]
pub struct StaffEdit {
    pub sur_name: Option<String>,
    pub first_name: Option<String>,
    pub designation: Option<Designation>,
    pub address: Option<String>,
}

/// Fields a head of department may change on a cadet record.
#[derive(Debug, Clone, Default)]
pub struct CadetEdit {
    pub sur_name: Option<String>,
    pub first_name: Option<String>,
    pub middle_name: Option<String>,
    pub level: Option<Level>,
    pub semester: Option<Semester>,
    pub squad: Option<u32>,
    pub rc: Option<u32>,
}

const STAFF_COLUMNS: &str = "s.id, s.sur_name, s.first_name, d.faculty_name, s.department, s.pin,
    s.passport, s.cv, s.designation, s.address, s.email, s.dob, s.password, s.remember_token,
    s.created_at, s.updated_at
    FROM staff s JOIN departments d ON d.name = s.department";

const CADET_COLUMNS: &str = "c.id, c.sur_name, c.first_name, c.middle_name, c.npa_number, c.pin,
    c.email, c.rc, d.faculty_name, c.department, c.level, c.semester, c.squad, c.sex,
    c.dob, c.home_town, c.local_govt, c.state, c.address,
    c.next_of_kin_sur_name, c.next_of_kin_first_name, c.next_of_kin_relationship,
    c.next_of_kin_address, c.passport, c.password, c.remember_token, c.created_at, c.updated_at
    FROM cadets c JOIN departments d ON d.name = c.department";

pub(crate) fn level_col(idx: usize, raw: u16) -> rusqlite::Result<Level> {
    Level::new(raw).map_err(|e| {
        rusqlite::Error::FromSqlConversionFailure(idx, rusqlite::types::Type::Integer, Box::new(e))
    })
}

fn admin_from_row(row: &Row<'_>) -> rusqlite::Result<Admin> {
    Ok(Admin {
        id: row.get(0)?,
        name: row.get(1)?,
        email: row.get(2)?,
        passport: row.get(3)?,
        password_hash: row.get(4)?,
        remember_token: row.get(5)?,
        created_at: from_millis(row.get(6)?),
        updated_at: from_millis(row.get(7)?),
    })
}

fn staff_from_row(row: &Row<'_>) -> rusqlite::Result<Staff> {
    let designation: Option<String> = row.get(8)?;
    Ok(Staff {
        id: row.get(0)?,
        sur_name: row.get(1)?,
        first_name: row.get(2)?,
        faculty: row.get(3)?,
        department: row.get(4)?,
        pin: row.get(5)?,
        passport: row.get(6)?,
        cv: row.get(7)?,
        designation: designation
            .map(|d| parse_col(8, &d, str::parse::<Designation>))
            .transpose()?,
        address: row.get(9)?,
        email: row.get(10)?,
        dob: row.get(11)?,
        password_hash: row.get(12)?,
        remember_token: row.get(13)?,
        created_at: from_millis(row.get(14)?),
        updated_at: from_millis(row.get(15)?),
    })
}

fn cadet_from_row(row: &Row<'_>) -> rusqlite::Result<Cadet> {
    let npa: String = row.get(4)?;
    let semester: String = row.get(11)?;
    let sex: String = row.get(13)?;
    Ok(Cadet {
        id: row.get(0)?,
        sur_name: row.get(1)?,
        first_name: row.get(2)?,
        middle_name: row.get(3)?,
        npa_number: parse_col(4, &npa, NpaNumber::parse)?,
        pin: row.get(5)?,
        email: row.get(6)?,
        rc: row.get(7)?,
        faculty: row.get(8)?,
        department: row.get(9)?,
        level: level_col(10, row.get(10)?)?,
        semester: parse_col(11, &semester, str::parse::<Semester>)?,
        squad: row.get(12)?,
        sex: parse_col(13, &sex, str::parse::<Sex>)?,
        personal: PersonalDetails {
            dob: row.get(14)?,
            home_town: row.get(15)?,
            local_govt: row.get(16)?,
            state: row.get(17)?,
            address: row.get(18)?,
            next_of_kin_sur_name: row.get(19)?,
            next_of_kin_first_name: row.get(20)?,
            next_of_kin_relationship: row.get(21)?,
            next_of_kin_address: row.get(22)?,
        },
        passport: row.get(23)?,
        password_hash: row.get(24)?,
        remember_token: row.get(25)?,
        created_at: from_millis(row.get(26)?),
        updated_at: from_millis(row.get(27)?),
    })
}

fn department_from_row(row: &Row<'_>) -> rusqlite::Result<Department> {
    Ok(Department {
        name: row.get(0)?,
        faculty_name: row.get(1)?,
        created_at: from_millis(row.get(2)?),
        updated_at: from_millis(row.get(3)?),
        deleted_at: row.get::<_, Option<i64>>(4)?.map(from_millis),
    })
}

impl Repo<'_> {
    pub fn insert_faculty(&self, name: &str) -> Result<Faculty, StoreError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(StoreError::CheckViolation("faculties.name".into()));
        }
        self.conn.execute(
            "INSERT INTO faculties (name, created_at, updated_at) VALUES (?1, ?2, ?2)",
            params![name, self.now_ms()],
        )?;
        self.get_faculty(name)
    }

    pub fn get_faculty(&self, name: &str) -> Result<Faculty, StoreError> {
        Ok(self.conn.query_row(
            "SELECT name, created_at, updated_at, deleted_at FROM faculties WHERE name = ?1",
            [name],
            |row| {
                Ok(Faculty {
                    name: row.get(0)?,
                    created_at: from_millis(row.get(1)?),
                    updated_at: from_millis(row.get(2)?),
                    deleted_at: row.get::<_, Option<i64>>(3)?.map(from_millis),
                })
            },
        )?)
    }

    pub fn soft_delete_faculty(&self, name: &str) -> Result<(), StoreError> {
        let n = self.conn.execute(
            "UPDATE faculties SET deleted_at = ?2, updated_at = ?2 WHERE name = ?1 AND deleted_at IS NULL",
            params![name, self.now_ms()],
        )?;
        if n == 0 {
            return Err(StoreError::NotFound);
        }
        Ok(())
    }

    pub fn insert_department(&self, name: &str, faculty: &str) -> Result<Department, StoreError> {
        let live: Option<i64> = self
            .conn
            .query_row(
                "SELECT 1 FROM faculties WHERE name = ?1 AND deleted_at IS NULL",
                [faculty],
                |r| r.get(0),
            )
            .optional()?;
        if live.is_none() {
            return Err(StoreError::ForeignKeyViolation);
        }
        self.conn.execute(
            "INSERT INTO departments (name, faculty_name, created_at, updated_at) VALUES (?1, ?2, ?3, ?3)",
            params![name.trim(), faculty, self.now_ms()],
        )?;
        self.get_department(name.trim())
    }

    pub fn get_department(&self, name: &str) -> Result<Department, StoreError> {
        Ok(self.conn.query_row(
            "SELECT name, faculty_name, created_at, updated_at, deleted_at FROM departments WHERE name = ?1",
            [name],
            department_from_row,
        )?)
    }

    /// A department that exists and whose faculty is live.
    pub fn live_department(&self, name: &str) -> Result<Department, StoreError> {
        self.conn
            .query_row(
                "SELECT d.name, d.faculty_name, d.created_at, d.updated_at, d.deleted_at
                 FROM departments d JOIN faculties f ON f.name = d.faculty_name
                 WHERE d.name = ?1 AND d.deleted_at IS NULL AND f.deleted_at IS NULL",
                [name],
                department_from_row,
            )
            .optional()?
            .ok_or(StoreError::ForeignKeyViolation)
    }

    pub fn list_departments(&self) -> Result<Vec<Department>, StoreError> {
        let mut stmt = self.conn.prepare(
            "SELECT name, faculty_name, created_at, updated_at, deleted_at FROM departments
             WHERE deleted_at IS NULL ORDER BY name",
        )?;
        let rows = stmt
            .query_map([], department_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    pub fn insert_admin(&self, new: &NewAdmin) -> Result<Admin, StoreError> {
        self.conn.execute(
            "INSERT INTO admins (name, email, passport, password, created_at, updated_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?5)",
            params![
                new.name,
                new.email,
                DEFAULT_PASSPORT,
                new.password_hash,
                self.now_ms()
            ],
        )?;
        self.get_admin(self.conn.last_insert_rowid())
    }

    pub fn get_admin(&self, id: i64) -> Result<Admin, StoreError> {
        Ok(self.conn.query_row(
            "SELECT id, name, email, passport, password, remember_token, created_at, updated_at
             FROM admins WHERE id = ?1",
            [id],
            admin_from_row,
        )?)
    }

    pub fn find_admin_by_email(&self, email: &str) -> Result<Option<Admin>, StoreError> {
        Ok(self
            .conn
            .query_row(
                "SELECT id, name, email, passport, password, remember_token, created_at, updated_at
                 FROM admins WHERE email = ?1",
                [email],
                admin_from_row,
            )
            .optional()?)
    }

    pub fn count_admins(&self) -> Result<i64, StoreError> {
        Ok(self
            .conn
            .query_row("SELECT COUNT(*) FROM admins", [], |r| r.get(0))?)
    }

    pub fn update_admin(&self, admin: &Admin) -> Result<Admin, StoreError> {
        let n = self.conn.execute(
            "UPDATE admins SET name = ?2, email = ?3, passport = ?4, updated_at = ?5 WHERE id = ?1",
            params![
                admin.id,
                admin.name,
                admin.email,
                admin.passport,
                self.now_ms()
            ],
        )?;
        if n == 0 {
            return Err(StoreError::NotFound);
        }
        self.get_admin(admin.id)
    }

    pub fn insert_staff(&self, new: &NewStaff) -> Result<Staff, StoreError> {
        self.live_department(&new.department)?;
        self.conn.execute(
            "INSERT INTO staff (sur_name, first_name, department, pin, passport, email, password,
                                created_at, updated_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?8)",
            params![
                new.sur_name,
                new.first_name,
                new.department,
                new.pin,
                DEFAULT_PASSPORT,
                new.email,
                new.password_hash,
                self.now_ms()
            ],
        )?;
        self.get_staff(self.conn.last_insert_rowid())
    }

    pub fn get_staff(&self, id: i64) -> Result<Staff, StoreError> {
        Ok(self.conn.query_row(
            &format!("SELECT {STAFF_COLUMNS} WHERE s.id = ?1"),
            [id],
            staff_from_row,
        )?)
    }

    pub fn find_staff_by_email(&self, email: &str) -> Result<Option<Staff>, StoreError> {
        Ok(self
            .conn
            .query_row(
                &format!("SELECT {STAFF_COLUMNS} WHERE s.email = ?1"),
                [email],
                staff_from_row,
            )
            .optional()?)
    }

    /// All staff, or only those of `department` when given.
    pub fn list_staff(&self, department: Option<&str>) -> Result<Vec<Staff>, StoreError> {
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {STAFF_COLUMNS} WHERE (?1 IS NULL OR s.department = ?1) ORDER BY s.id"
        ))?;
        let rows = stmt
            .query_map([department], staff_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    pub fn department_hod(&self, department: &str) -> Result<Option<Staff>, StoreError> {
        Ok(self
            .conn
            .query_row(
                &format!(
                    "SELECT {STAFF_COLUMNS} WHERE s.department = ?1 AND s.designation = 'hod'"
                ),
                [department],
                staff_from_row,
            )
            .optional()?)
    }

    /// Writes every mutable profile column of `staff`.
    pub fn update_staff(&self, staff: &Staff) -> Result<Staff, StoreError> {
        let n = self.conn.execute(
            "UPDATE staff SET sur_name = ?2, first_name = ?3, passport = ?4, cv = ?5,
                 designation = ?6, address = ?7, email = ?8, dob = ?9, updated_at = ?10
             WHERE id = ?1",
            params![
                staff.id,
                staff.sur_name,
                staff.first_name,
                staff.passport,
                staff.cv,
                staff.designation.map(Designation::as_str),
                staff.address,
                staff.email,
                staff.dob,
                self.now_ms()
            ],
        )?;
        if n == 0 {
            return Err(StoreError::NotFound);
        }
        self.get_staff(staff.id)
    }

    pub fn insert_cadet(&self, new: &NewCadet) -> Result<Cadet, StoreError> {
        self.live_department(&new.department)?;
        let p = &new.personal;
        self.conn.execute(
            "INSERT INTO cadets (sur_name, first_name, middle_name, npa_number, pin, email, rc,
                 department, level, semester, squad, sex, dob, home_town, local_govt, state,
                 address, next_of_kin_sur_name, next_of_kin_first_name, next_of_kin_relationship,
                 next_of_kin_address, passport, password, created_at, updated_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14, ?15, ?16, ?17,
                     ?18, ?19, ?20, ?21, ?22, ?23, ?24, ?24)",
            params![
                new.sur_name,
                new.first_name,
                new.middle_name,
                new.npa_number.as_str(),
                new.pin,
                new.email,
                new.rc,
                new.department,
                new.level.value(),
                new.semester.as_str(),
                new.squad,
                new.sex.as_str(),
                p.dob,
                p.home_town,
                p.local_govt,
                p.state,
                p.address,
                p.next_of_kin_sur_name,
                p.next_of_kin_first_name,
                p.next_of_kin_relationship,
                p.next_of_kin_address,
                DEFAULT_PASSPORT,
                new.password_hash,
                self.now_ms()
            ],
        )?;
        self.get_cadet(self.conn.last_insert_rowid())
    }

    pub fn get_cadet(&self, id: i64) -> Result<Cadet, StoreError> {
        Ok(self.conn.query_row(
            &format!("SELECT {CADET_COLUMNS} WHERE c.id = ?1"),
            [id],
            cadet_from_row,
        )?)
    }

    pub fn find_cadet_by_email(&self, email: &str) -> Result<Option<Cadet>, StoreError> {
        Ok(self
            .conn
            .query_row(
                &format!("SELECT {CADET_COLUMNS} WHERE c.email = ?1"),
                [email],
                cadet_from_row,
            )
            .optional()?)
    }

    pub fn find_cadet_by_npa(&self, npa: &NpaNumber) -> Result<Option<Cadet>, StoreError> {
        Ok(self
            .conn
            .query_row(
                &format!("SELECT {CADET_COLUMNS} WHERE c.npa_number = ?1"),
                [npa.as_str()],
                cadet_from_row,
            )
            .optional()?)
    }

    pub fn list_cadets(&self, department: Option<&str>) -> Result<Vec<Cadet>, StoreError> {
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {CADET_COLUMNS} WHERE (?1 IS NULL OR c.department = ?1) ORDER BY c.id"
        ))?;
        let rows = stmt
            .query_map([department], cadet_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    pub fn update_cadet(&self, cadet: &Cadet) -> Result<Cadet, StoreError> {
        let p = &cadet.personal;
        let n = self.conn.execute(
            "UPDATE cadets SET sur_name = ?2, first_name = ?3, middle_name = ?4, email = ?5,
                 rc = ?6, level = ?7, semester = ?8, squad = ?9, dob = ?10, home_town = ?11,
                 local_govt = ?12, state = ?13, address = ?14, next_of_kin_sur_name = ?15,
                 next_of_kin_first_name = ?16, next_of_kin_relationship = ?17,
                 next_of_kin_address = ?18, passport = ?19, updated_at = ?20
             WHERE id = ?1",
            params![
                cadet.id,
                cadet.sur_name,
                cadet.first_name,
                cadet.middle_name,
                cadet.email,
                cadet.rc,
                cadet.level.value(),
                cadet.semester.as_str(),
                cadet.squad,
                p.dob,
                p.home_town,
                p.local_govt,
                p.state,
                p.address,
                p.next_of_kin_sur_name,
                p.next_of_kin_first_name,
                p.next_of_kin_relationship,
                p.next_of_kin_address,
                cadet.passport,
                self.now_ms()
            ],
        )?;
        if n == 0 {
            return Err(StoreError::NotFound);
        }
        self.get_cadet(cadet.id)
    }

    /// Password hash of any account kind.
    pub fn password_hash(&self, kind: AccountKind, id: i64) -> Result<String, StoreError> {
        let sql = match kind {
            AccountKind::Admin => "SELECT password FROM admins WHERE id = ?1",
            AccountKind::Staff => "SELECT password FROM staff WHERE id = ?1",
            AccountKind::Cadet => "SELECT password FROM cadets WHERE id = ?1",
        };
        Ok(self.conn.query_row(sql, [id], |r| r.get(0))?)
    }

    pub fn set_password_hash(
        &self,
        kind: AccountKind,
        id: i64,
        hash: &str,
    ) -> Result<(), StoreError> {
        let sql = match kind {
            AccountKind::Admin => "UPDATE admins SET password = ?2, updated_at = ?3 WHERE id = ?1",
            AccountKind::Staff => "UPDATE staff SET password = ?2, updated_at = ?3 WHERE id = ?1",
            AccountKind::Cadet => "UPDATE cadets SET password = ?2, updated_at = ?3 WHERE id = ?1",
        };
        let n = self.conn.execute(sql, params![id, hash, self.now_ms()])?;
        if n == 0 {
            return Err(StoreError::NotFound);
        }
        Ok(())
    }

    /// `(id, password hash)` of the account with `email` in the `kind` table.
    pub fn find_credentials(
        &self,
        kind: AccountKind,
        email: &str,
    ) -> Result<Option<(i64, String)>, StoreError> {
        let sql = match kind {
            AccountKind::Admin => "SELECT id, password FROM admins WHERE email = ?1",
            AccountKind::Staff => "SELECT id, password FROM staff WHERE email = ?1",
            AccountKind::Cadet => "SELECT id, password FROM cadets WHERE email = ?1",
        };
        Ok(self
            .conn
            .query_row(sql, [email], |r| Ok((r.get(0)?, r.get(1)?)))
            .optional()?)
    }

    /// The injectable variant of [`Repo::find_credentials`], kept only to
    /// prove the injection probes detect it.
    #[cfg(feature = "insecure-demo")]
    pub fn find_credentials_concatenated(
        &self,
        kind: AccountKind,
        email: &str,
    ) -> Result<Option<(i64, String)>, StoreError> {
        let table = match kind {
            AccountKind::Admin => "admins",
            AccountKind::Staff => "staff",
            AccountKind::Cadet => "cadets",
        };
        let sql = format!("SELECT id, password FROM {table} WHERE email = '{email}'");
        Ok(self
            .conn
            .query_row(&sql, [], |r| Ok((r.get(0)?, r.get(1)?)))
            .optional()?)
    }

    /// `(kind, id, hash)` for every account, for hygiene checks.
    pub fn all_password_hashes(&self) -> Result<Vec<(AccountKind, i64, String)>, StoreError> {
        let mut out = Vec::new();
        for (kind, sql) in [
            (AccountKind::Admin, "SELECT id, password FROM admins"),
            (AccountKind::Staff, "SELECT id, password FROM staff"),
            (AccountKind::Cadet, "SELECT id, password FROM cadets"),
        ] {
            let mut stmt = self.conn.prepare(sql)?;
            let rows = stmt.query_map([], |r| Ok((kind, r.get(0)?, r.get(1)?)))?;
            for row in rows {
                out.push(row?);
            }
        }
        Ok(out)
    }
}
