//! Own-profile views and edits, plus the staff and cadet management lists.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::access::{scope_department, Action, Principal, Resource};
use crate::audit_log::AuditEntry;
use crate::domain::{
    optional_text, required_text, AccountKind, Admin, Cadet, Designation, Level, Semester, Staff,
};
use crate::error::{Error, Result};
use crate::service::Sims;
use crate::store::{Outcome, Repo};

/// The caller's own account record, tagged by account kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Admin(Admin),
    Staff(Staff),
    Cadet(Cadet),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Me {
    pub principal: Principal,
    pub profile: Profile,
}

/// Self-service profile changes. Unknown fields are rejected, so a client
/// cannot smuggle in role, department, level or email changes.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEdit {
    pub name: Option<String>,
    pub sur_name: Option<String>,
    pub first_name: Option<String>,
    pub middle_name: Option<String>,
    pub address: Option<String>,
    pub dob: Option<String>,
    pub cv: Option<String>,
    pub passport: Option<String>,
    /// Staff only. Setting it completes a pending registration.
    pub designation: Option<Designation>,
    pub home_town: Option<String>,
    pub local_govt: Option<String>,
    pub state: Option<String>,
    pub next_of_kin_sur_name: Option<String>,
    pub next_of_kin_first_name: Option<String>,
    pub next_of_kin_relationship: Option<String>,
    pub next_of_kin_address: Option<String>,
}

/// Administrator edits to a staff record.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaffUpdate {
    pub id: i64,
    pub sur_name: Option<String>,
    pub first_name: Option<String>,
    pub designation: Option<Designation>,
    pub address: Option<String>,
}

/// Head-of-department edits to a cadet record, including level promotion.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CadetUpdate {
    pub id: i64,
    pub sur_name: Option<String>,
    pub first_name: Option<String>,
    pub middle_name: Option<String>,
    pub level: Option<Level>,
    pub semester: Option<Semester>,
    pub squad: Option<u32>,
    pub rc: Option<u32>,
}

fn replace(slot: &mut String, value: &Option<String>, field: &'static str) -> Result<()> {
    if let Some(v) = value {
        *slot = required_text(v, field)?;
    }
    Ok(())
}

fn replace_opt(
    slot: &mut Option<String>,
    value: &Option<String>,
    field: &'static str,
) -> Result<()> {
    if let Some(v) = value {
        *slot = optional_text(Some(v), field)?;
    }
    Ok(())
}

fn reject_if_set<T>(value: &Option<T>, field: &'static str) -> Result<()> {
    match value {
        Some(_) => Err(crate::ValidationError::InvalidField(field).into()),
        None => Ok(()),
    }
}

/// A second HOD in one department is refused.
fn check_hod_seat(repo: &Repo<'_>, department: &str, staff_id: i64) -> Result<()> {
    match repo.department_hod(department)? {
        Some(hod) if hod.id != staff_id => Err(Error::HodSeatTaken),
        _ => Ok(()),
    }
}

impl Sims {
    pub fn view_own_profile(&self, principal: &Principal) -> Result<Me> {
        self.authorize(principal, Action::ViewOwnProfile, &Resource::Any)?;
        let id = principal.account.id;
        let profile = self.read(|repo| {
            Ok(match principal.account.kind {
                AccountKind::Admin => Profile::Admin(repo.get_admin(id)?),
                AccountKind::Staff => Profile::Staff(repo.get_staff(id)?),
                AccountKind::Cadet => Profile::Cadet(repo.get_cadet(id)?),
            })
        })?;
        Ok(Me {
            principal: principal.clone(),
            profile,
        })
    }

    /// Applies `edit` to the caller's own record. For staff with no
    /// designation yet, a designation in `edit` completes registration.
    pub fn edit_own_profile(&self, principal: &Principal, edit: &ProfileEdit) -> Result<Me> {
        self.authorize(principal, Action::EditOwnProfile, &Resource::Any)?;
        let id = principal.account.id;
        self.tx(|repo| {
            match principal.account.kind {
                AccountKind::Admin => {
                    for (value, field) in [
                        (&edit.sur_name, "sur_name"),
                        (&edit.first_name, "first_name"),
                        (&edit.middle_name, "middle_name"),
                        (&edit.address, "address"),
                        (&edit.dob, "dob"),
                        (&edit.cv, "cv"),
                    ] {
                        reject_if_set(value, field)?;
                    }
                    reject_if_set(&edit.designation, "designation")?;
                    let mut admin = repo.get_admin(id)?;
                    replace(&mut admin.name, &edit.name, "name")?;
                    replace(&mut admin.passport, &edit.passport, "passport")?;
                    repo.update_admin(&admin)?;
                }
                AccountKind::Staff => {
                    reject_if_set(&edit.name, "name")?;
                    reject_if_set(&edit.middle_name, "middle_name")?;
                    let mut staff = repo.get_staff(id)?;
                    if let Some(designation) = edit.designation {
                        if staff.designation.is_some() {
                            return Err(Error::Unauthorized);
                        }
                        if designation == Designation::Hod {
                            check_hod_seat(repo, &staff.department, id)?;
                        }
                        staff.designation = Some(designation);
                    }
                    replace(&mut staff.sur_name, &edit.sur_name, "sur_name")?;
                    replace(&mut staff.first_name, &edit.first_name, "first_name")?;
                    replace(&mut staff.passport, &edit.passport, "passport")?;
                    replace_opt(&mut staff.address, &edit.address, "address")?;
                    replace_opt(&mut staff.dob, &edit.dob, "dob")?;
                    replace_opt(&mut staff.cv, &edit.cv, "cv")?;
                    repo.update_staff(&staff)?;
                }
                AccountKind::Cadet => {
                    reject_if_set(&edit.name, "name")?;
                    reject_if_set(&edit.cv, "cv")?;
                    reject_if_set(&edit.designation, "designation")?;
                    let mut cadet = repo.get_cadet(id)?;
                    replace(&mut cadet.sur_name, &edit.sur_name, "sur_name")?;
                    replace(&mut cadet.first_name, &edit.first_name, "first_name")?;
                    replace(&mut cadet.passport, &edit.passport, "passport")?;
                    replace_opt(&mut cadet.middle_name, &edit.middle_name, "middle_name")?;
                    let p = &mut cadet.personal;
                    replace_opt(&mut p.address, &edit.address, "address")?;
                    replace_opt(&mut p.dob, &edit.dob, "dob")?;
                    replace_opt(&mut p.home_town, &edit.home_town, "home_town")?;
                    replace_opt(&mut p.local_govt, &edit.local_govt, "local_govt")?;
                    replace_opt(&mut p.state, &edit.state, "state")?;
                    replace_opt(
                        &mut p.next_of_kin_sur_name,
                        &edit.next_of_kin_sur_name,
                        "next_of_kin_sur_name",
                    )?;
                    replace_opt(
                        &mut p.next_of_kin_first_name,
                        &edit.next_of_kin_first_name,
                        "next_of_kin_first_name",
                    )?;
                    replace_opt(
                        &mut p.next_of_kin_relationship,
                        &edit.next_of_kin_relationship,
                        "next_of_kin_relationship",
                    )?;
                    replace_opt(
                        &mut p.next_of_kin_address,
                        &edit.next_of_kin_address,
                        "next_of_kin_address",
                    )?;
                    repo.update_cadet(&cadet)?;
                }
            }
            let actor = principal.actor();
            let entry = AuditEntry::new(
                actor.clone(),
                Action::EditOwnProfile.as_str(),
                actor,
                Outcome::Success,
            )
            .with_details(json!({ "designation": edit.designation.map(Designation::as_str) }));
            Ok(self.audit(repo, &entry)?)
        })?;
        let fresh = self.principal_for(principal.account)?;
        self.view_own_profile(&fresh)
    }

    pub fn list_staff(&self, principal: &Principal) -> Result<Vec<Staff>> {
        self.authorize(principal, Action::ViewStaffList, &Resource::Any)?;
        self.read(|repo| Ok(repo.list_staff(scope_department(principal))?))
    }

    /// Administrator edit of a staff record. Demoting an HOD takes effect on
    /// that person's next request, since principals are rebuilt per request.
    pub fn edit_staff(&self, principal: &Principal, update: &StaffUpdate) -> Result<Staff> {
        let department = self.read(|repo| Ok(repo.get_staff(update.id)?.department))?;
        self.authorize(
            principal,
            Action::EditStaff,
            &Resource::Staff { department },
        )?;
        self.tx(|repo| {
            let mut staff = repo.get_staff(update.id)?;
            let before = staff.designation;
            if let Some(designation) = update.designation {
                if designation == Designation::Hod {
                    check_hod_seat(repo, &staff.department, staff.id)?;
                }
                staff.designation = Some(designation);
            }
            replace(&mut staff.sur_name, &update.sur_name, "sur_name")?;
            replace(&mut staff.first_name, &update.first_name, "first_name")?;
            replace_opt(&mut staff.address, &update.address, "address")?;
            let saved = repo.update_staff(&staff)?;
            let entry = AuditEntry::new(
                principal.actor(),
                Action::EditStaff.as_str(),
                format!("staff:{}", saved.id),
                Outcome::Success,
            )
            .with_details(json!({
                "designation_before": before.map(Designation::as_str),
                "designation_after": saved.designation.map(Designation::as_str),
            }));
            self.audit(repo, &entry)?;
            Ok(saved)
        })
    }

    /// Cadets of the caller's department.
    pub fn list_cadets(&self, principal: &Principal) -> Result<Vec<Cadet>> {
        let department = principal.department.clone().ok_or(Error::Unauthorized)?;
        self.authorize(
            principal,
            Action::ListCadets,
            &Resource::Department(department.clone()),
        )?;
        self.read(|repo| Ok(repo.list_cadets(Some(&department))?))
    }

    pub fn edit_cadet(&self, principal: &Principal, update: &CadetUpdate) -> Result<Cadet> {
        let department = self.read(|repo| Ok(repo.get_cadet(update.id)?.department))?;
        self.authorize(
            principal,
            Action::EditCadet,
            &Resource::Cadet {
                id: update.id,
                department,
            },
        )?;
        self.tx(|repo| {
            let mut cadet = repo.get_cadet(update.id)?;
            let level_before = cadet.level;
            replace(&mut cadet.sur_name, &update.sur_name, "sur_name")?;
            replace(&mut cadet.first_name, &update.first_name, "first_name")?;
            replace_opt(&mut cadet.middle_name, &update.middle_name, "middle_name")?;
            if let Some(level) = update.level {
                cadet.level = level;
            }
            if let Some(semester) = update.semester {
                cadet.semester = semester;
            }
            if let Some(squad) = update.squad {
                cadet.squad = squad;
            }
            if let Some(rc) = update.rc {
                cadet.rc = rc;
            }
            let saved = repo.update_cadet(&cadet)?;
            let entry = AuditEntry::new(
                principal.actor(),
                Action::EditCadet.as_str(),
                format!("cadet:{}", saved.id),
                Outcome::Success,
            )
            .with_details(
                json!({ "level_before": level_before.value(), "level_after": saved.level.value() }),
            );
            self.audit(repo, &entry)?;
            Ok(saved)
        })
    }
}
