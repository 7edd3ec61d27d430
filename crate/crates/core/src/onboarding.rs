//! Registration pins, the NPA roster and staff and cadet self-registration.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::access::{Action, Principal, Resource};
use crate::audit_log::{AuditEntry, ANONYMOUS};
use crate::auth::registration_key;
use crate::config::{MAX_PINS_PER_REQUEST, MAX_ROSTER_LINES};
use crate::domain::{
    optional_text, required_text, validate_email, AccountKind, AccountRef, Cadet, Level, NpaNumber,
    NpaRosterEntry, PersonalDetails, PinRole, RegistrationPin, Semester, Sex, Staff,
};
use crate::error::{Error, Result, ValidationError};
use crate::security::generate_pin;
use crate::security::password::check_strength;
use crate::service::Sims;
use crate::store::{NewCadet, NewStaff, Outcome, PinClaim, StoreError};

/// Attempts at drawing a fresh code before giving up on a batch.
const PIN_DRAW_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaffRegistration {
    pub pin: String,
    pub sur_name: String,
    pub first_name: String,
    pub email: String,
    pub password: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CadetRegistration {
    pub pin: String,
    pub npa_number: String,
    pub sur_name: String,
    pub first_name: String,
    #[serde(default)]
    pub middle_name: Option<String>,
    pub email: String,
    pub password: String,
    pub rc: u32,
    pub level: Level,
    pub semester: Semester,
    pub squad: u32,
    pub sex: Sex,
    #[serde(default)]
    pub dob: Option<String>,
    #[serde(default)]
    pub home_town: Option<String>,
    #[serde(default)]
    pub local_govt: Option<String>,
    #[serde(default)]
    pub state: Option<String>,
    #[serde(default)]
    pub address: Option<String>,
    #[serde(default)]
    pub next_of_kin_sur_name: Option<String>,
    #[serde(default)]
    pub next_of_kin_first_name: Option<String>,
    #[serde(default)]
    pub next_of_kin_relationship: Option<String>,
    #[serde(default)]
    pub next_of_kin_address: Option<String>,
}

impl CadetRegistration {
    fn personal(&self) -> Result<PersonalDetails> {
        Ok(PersonalDetails {
            dob: optional_text(self.dob.as_deref(), "dob")?,
            home_town: optional_text(self.home_town.as_deref(), "home_town")?,
            local_govt: optional_text(self.local_govt.as_deref(), "local_govt")?,
            state: optional_text(self.state.as_deref(), "state")?,
            address: optional_text(self.address.as_deref(), "address")?,
            next_of_kin_sur_name: optional_text(
                self.next_of_kin_sur_name.as_deref(),
                "next_of_kin_sur_name",
            )?,
            next_of_kin_first_name: optional_text(
                self.next_of_kin_first_name.as_deref(),
                "next_of_kin_first_name",
            )?,
            next_of_kin_relationship: optional_text(
                self.next_of_kin_relationship.as_deref(),
                "next_of_kin_relationship",
            )?,
            next_of_kin_address: optional_text(
                self.next_of_kin_address.as_deref(),
                "next_of_kin_address",
            )?,
        })
    }
}

/// One rejected roster line, numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedLine {
    pub line: usize,
    pub text: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RosterReport {
    pub accepted: Vec<NpaNumber>,
    pub rejected: Vec<RejectedLine>,
}

fn pin_action(role: PinRole) -> Action {
    match role {
        PinRole::Staff => Action::CreateStaffPin,
        PinRole::Cadet => Action::CreateCadetPin,
    }
}

/// Failures that count against the source's pin redemption budget.
fn is_pin_failure(err: &Error) -> bool {
    matches!(
        err,
        Error::PinNotFound | Error::PinAlreadyConsumed | Error::PinScopeMismatch
    )
}

impl Sims {
    /// Issues `count` fresh pins for `role` in `department`.
    pub fn generate_pins(
        &self,
        principal: &Principal,
        role: PinRole,
        department: &str,
        count: u32,
    ) -> Result<Vec<RegistrationPin>> {
        let action = pin_action(role);
        self.authorize(
            principal,
            action,
            &Resource::Department(department.to_owned()),
        )?;
        if !(1..=MAX_PINS_PER_REQUEST).contains(&count) {
            return Err(ValidationError::CountOutOfRange.into());
        }
        self.tx(|repo| {
            repo.live_department(department)?;
            let mut pins = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let mut attempt = 0;
                let pin = loop {
                    match repo.insert_pin(&generate_pin(), role, department, principal.account) {
                        Err(StoreError::DuplicateKey(_)) if attempt < PIN_DRAW_ATTEMPTS => {
                            attempt += 1
                        }
                        other => break other?,
                    }
                };
                pins.push(pin);
            }
            let entry = AuditEntry::new(
                principal.actor(),
                action.as_str(),
                department,
                Outcome::Success,
            )
            .with_details(json!({ "role": role.as_str(), "count": count }));
            self.audit(repo, &entry)?;
            Ok(pins)
        })
    }

    /// Pins the caller may manage: staff pins for an admin, the caller's
    /// department's cadet pins for an HOD.
    pub fn list_pins(&self, principal: &Principal, role: PinRole) -> Result<Vec<RegistrationPin>> {
        let action = pin_action(role);
        let department = match role {
            PinRole::Staff => None,
            PinRole::Cadet => Some(principal.department.clone().ok_or(Error::Unauthorized)?),
        };
        let resource = department
            .clone()
            .map_or(Resource::Any, Resource::Department);
        self.authorize(principal, action, &resource)?;
        self.read(|repo| Ok(repo.list_pins(department.as_deref(), Some(role))?))
    }

    /// Revokes an unused pin.
    pub fn delete_pin(&self, principal: &Principal, role: PinRole, code: &str) -> Result<()> {
        let action = pin_action(role);
        let pin = self.read(|repo| Ok(repo.get_pin(code)?))?;
        if pin.target_role != role {
            return Err(Error::PinNotFound);
        }
        self.authorize(
            principal,
            action,
            &Resource::Department(pin.department.clone()),
        )?;
        self.tx(|repo| {
            repo.delete_unused_pin(code)?;
            let entry = AuditEntry::new(
                principal.actor(),
                action.as_str(),
                pin.department.clone(),
                Outcome::Success,
            )
            .with_details(json!({ "deleted": true }));
            Ok(self.audit(repo, &entry)?)
        })
    }

    /// Stores each valid, new NPA number as an unclaimed roster entry.
    /// Invalid and duplicate lines are reported and skipped.
    pub fn upload_npa_roster(
        &self,
        principal: &Principal,
        department: &str,
        text: &str,
    ) -> Result<RosterReport> {
        self.authorize(
            principal,
            Action::UploadNpaNumbers,
            &Resource::Department(department.to_owned()),
        )?;
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() > MAX_ROSTER_LINES {
            return Err(ValidationError::RosterTooLarge.into());
        }
        self.tx(|repo| {
            repo.live_department(department)?;
            let mut report = RosterReport::default();
            for (idx, raw) in lines.iter().enumerate() {
                let trimmed = raw.trim();
                if trimmed.is_empty() {
                    continue;
                }
                let reject = |reason| RejectedLine {
                    line: idx + 1,
                    text: trimmed.chars().take(64).collect(),
                    reason,
                };
                let npa = match NpaNumber::parse(trimmed) {
                    Ok(npa) => npa,
                    Err(e) => {
                        report.rejected.push(reject(e.machine_code()));
                        continue;
                    }
                };
                match repo.insert_roster_entry(&npa, department) {
                    Ok(_) => report.accepted.push(npa),
                    Err(StoreError::DuplicateKey(_)) => report.rejected.push(reject("duplicate")),
                    Err(e) => return Err(e.into()),
                }
            }
            let entry = AuditEntry::new(
                principal.actor(),
                Action::UploadNpaNumbers.as_str(),
                department,
                Outcome::Success,
            )
            .with_details(
                json!({ "accepted": report.accepted.len(), "rejected": report.rejected.len() }),
            );
            self.audit(repo, &entry)?;
            Ok(report)
        })
    }

    pub fn list_roster(&self, principal: &Principal) -> Result<Vec<NpaRosterEntry>> {
        let department = principal.department.clone().ok_or(Error::Unauthorized)?;
        self.authorize(
            principal,
            Action::UploadNpaNumbers,
            &Resource::Department(department.clone()),
        )?;
        self.read(|repo| Ok(repo.list_roster(&department)?))
    }

    /// Audits a failed anonymous registration and counts it against the
    /// source's redemption budget when the pin was at fault.
    fn registration_failed<T>(&self, action: Action, source: &str, err: Error) -> Result<T> {
        if is_pin_failure(&err) {
            self.record_failure(&registration_key(source))?;
        }
        let entry = AuditEntry::new(ANONYMOUS, action.as_str(), "registration", Outcome::Failure)
            .with_details(json!({ "reason": err.machine_code(), "source": source }));
        self.read(|repo| Ok(self.audit(repo, &entry)?))?;
        Err(err)
    }

    /// Self-registration for staff holding a staff pin. The account is
    /// created with no designation; registration is completed from the
    /// profile.
    pub fn register_staff(&self, input: &StaffRegistration, source: &str) -> Result<Staff> {
        self.ensure_not_throttled(&registration_key(source))?;
        let prepared = (|| -> Result<NewStaff> {
            check_strength(&input.password)?;
            Ok(NewStaff {
                sur_name: required_text(&input.sur_name, "sur_name")?,
                first_name: required_text(&input.first_name, "first_name")?,
                department: String::new(),
                pin: input.pin.trim().to_owned(),
                email: validate_email(&input.email)?,
                password_hash: self.hasher().hash(&input.password)?,
            })
        })();
        let mut new = match prepared {
            Ok(new) => new,
            Err(e) => return self.registration_failed(Action::RegisterStaff, source, e),
        };
        let outcome = self.tx(|repo| {
            let pin = repo.get_pin(&new.pin)?;
            if pin.target_role != PinRole::Staff {
                return Err(Error::PinScopeMismatch);
            }
            if pin.consumed {
                return Err(Error::PinAlreadyConsumed);
            }
            new.department = pin.department.clone();
            let staff = repo.insert_staff(&new)?;
            let claim = PinClaim {
                role: PinRole::Staff,
                department: pin.department,
                claimant: AccountRef {
                    kind: AccountKind::Staff,
                    id: staff.id,
                },
            };
            repo.redeem_pin(&new.pin, &claim)?;
            let entry = AuditEntry::new(
                ANONYMOUS,
                Action::RegisterStaff.as_str(),
                format!("staff:{}", staff.id),
                Outcome::Success,
            )
            .with_details(json!({ "department": staff.department, "source": source }));
            self.audit(repo, &entry)?;
            Ok(staff)
        });
        match outcome {
            Ok(staff) => Ok(staff),
            Err(e) => self.registration_failed(Action::RegisterStaff, source, e),
        }
    }

    /// Self-registration for cadets holding a cadet pin and a rostered NPA
    /// number of the pin's department. Pin, roster claim and account commit
    /// together or not at all.
    pub fn register_cadet(&self, input: &CadetRegistration, source: &str) -> Result<Cadet> {
        self.ensure_not_throttled(&registration_key(source))?;
        let prepared = (|| -> Result<NewCadet> {
            check_strength(&input.password)?;
            Ok(NewCadet {
                sur_name: required_text(&input.sur_name, "sur_name")?,
                first_name: required_text(&input.first_name, "first_name")?,
                middle_name: optional_text(input.middle_name.as_deref(), "middle_name")?,
                npa_number: NpaNumber::parse(&input.npa_number)?,
                pin: input.pin.trim().to_owned(),
                email: validate_email(&input.email)?,
                rc: input.rc,
                department: String::new(),
                level: input.level,
                semester: input.semester,
                squad: input.squad,
                sex: input.sex,
                personal: input.personal()?,
                password_hash: self.hasher().hash(&input.password)?,
            })
        })();
        let mut new = match prepared {
            Ok(new) => new,
            Err(e) => return self.registration_failed(Action::RegisterCadet, source, e),
        };
        let outcome = self.tx(|repo| {
            let pin = repo.get_pin(&new.pin)?;
            if pin.target_role != PinRole::Cadet {
                return Err(Error::PinScopeMismatch);
            }
            if pin.consumed {
                return Err(Error::PinAlreadyConsumed);
            }
            let entry = repo
                .roster_entry(&new.npa_number)?
                .ok_or(Error::NpaNotOnRoster)?;
            if entry.department != pin.department {
                return Err(Error::NpaNotOnRoster);
            }
            if entry.claimed {
                return Err(Error::NpaAlreadyClaimed);
            }
            new.department = pin.department.clone();
            let cadet = match repo.insert_cadet(&new) {
                Err(StoreError::DuplicateKey(target)) if target.ends_with("npa_number") => {
                    return Err(Error::NpaAlreadyClaimed)
                }
                other => other?,
            };
            if !repo.claim_roster_entry(&new.npa_number, cadet.id)? {
                return Err(Error::NpaAlreadyClaimed);
            }
            let claim = PinClaim {
                role: PinRole::Cadet,
                department: pin.department,
                claimant: AccountRef {
                    kind: AccountKind::Cadet,
                    id: cadet.id,
                },
            };
            repo.redeem_pin(&new.pin, &claim)?;
            let audit = AuditEntry::new(
                ANONYMOUS,
                Action::RegisterCadet.as_str(),
                format!("cadet:{}", cadet.id),
                Outcome::Success,
            )
            .with_details(json!({ "department": cadet.department, "source": source }));
            self.audit(repo, &audit)?;
            Ok(cadet)
        });
        match outcome {
            Ok(cadet) => Ok(cadet),
            Err(e) => self.registration_failed(Action::RegisterCadet, source, e),
        }
    }
}
