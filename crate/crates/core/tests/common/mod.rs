#![allow(dead_code)]

use std::sync::Arc;

use chrono::{DateTime, Utc};
use sims_core::academics::{AssignInput, CourseInput, WindowInput};
use sims_core::auth::LoginOutcome;
use sims_core::domain::{AccountKind, Course, Designation, Level, PinRole, Semester, Sex};
use sims_core::onboarding::{CadetRegistration, StaffRegistration};
use sims_core::profile::ProfileEdit;
use sims_core::security::{EncryptionKey, HashAlgorithm, HashPolicy};
use sims_core::service::AdminSeed;
use sims_core::{ManualClock, Principal, ServiceConfig, Sims};
use tempfile::TempDir;

pub const ADMIN_EMAIL: &str = "admin@nda.edu.ng";
pub const ADMIN_PASSWORD: &str = "admin-pass-2019";
pub const STAFF_PASSWORD: &str = "staff-pass-2019";
pub const CADET_PASSWORD: &str = "cadet-pass-2019";
pub const SOURCE: &str = "127.0.0.1";

pub struct World {
    pub sims: Sims,
    pub clock: Arc<ManualClock>,
    pub dir: TempDir,
    pub admin: Principal,
}

pub fn start_time() -> DateTime<Utc> {
    DateTime::from_timestamp(1_560_000_000, 0).unwrap()
}

impl World {
    pub fn new() -> Self {
        Self::with_config(|_| {})
    }

    pub fn with_config(tweak: impl FnOnce(&mut ServiceConfig)) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ServiceConfig::new(
            dir.path().join("sims.db"),
            dir.path().join("uploads"),
            EncryptionKey::generate(),
        );
        config.hash_policy = HashPolicy {
            algorithm: HashAlgorithm::Argon2id,
            ..HashPolicy::default()
        };
        tweak(&mut config);
        let clock = Arc::new(ManualClock::new(start_time()));
        let sims = Sims::open(config, clock.clone()).unwrap();
        sims.migrate().unwrap();
        sims.seed(Some(&AdminSeed {
            name: "Registrar".into(),
            email: ADMIN_EMAIL.into(),
            password: ADMIN_PASSWORD.into(),
        }))
        .unwrap();
        let admin = sims
            .login(
                AccountKind::Admin,
                ADMIN_EMAIL,
                ADMIN_PASSWORD,
                SOURCE,
                None,
            )
            .unwrap()
            .principal;
        Self {
            sims,
            clock,
            dir,
            admin,
        }
    }

    pub fn login(&self, kind: AccountKind, email: &str, password: &str) -> LoginOutcome {
        self.sims
            .login(kind, email, password, SOURCE, None)
            .unwrap()
    }

    pub fn staff_pin(&self, department: &str) -> String {
        self.sims
            .generate_pins(&self.admin, PinRole::Staff, department, 1)
            .unwrap()
            .remove(0)
            .pin_code
    }

    /// Registers a staff member and completes registration with `designation`.
    pub fn staff(&self, department: &str, designation: Designation, email: &str) -> Principal {
        let pin = self.staff_pin(department);
        self.sims
            .register_staff(&staff_registration(&pin, email), SOURCE)
            .unwrap();
        let pending = self
            .login(AccountKind::Staff, email, STAFF_PASSWORD)
            .principal;
        assert!(pending.pending_completion);
        let edit = ProfileEdit {
            designation: Some(designation),
            ..ProfileEdit::default()
        };
        self.sims
            .edit_own_profile(&pending, &edit)
            .unwrap()
            .principal
    }

    pub fn cadet_pin(&self, hod: &Principal) -> String {
        let department = hod.department.clone().unwrap();
        self.sims
            .generate_pins(hod, PinRole::Cadet, &department, 1)
            .unwrap()
            .remove(0)
            .pin_code
    }

    /// Rosters `npa` in the HOD's department and registers a cadet with it.
    pub fn cadet(&self, hod: &Principal, npa: &str, level: u16, email: &str) -> Principal {
        let department = hod.department.clone().unwrap();
        let report = self.sims.upload_npa_roster(hod, &department, npa).unwrap();
        assert_eq!(report.accepted.len(), 1, "{report:?}");
        let pin = self.cadet_pin(hod);
        self.sims
            .register_cadet(&cadet_registration(&pin, npa, level, email), SOURCE)
            .unwrap();
        self.login(AccountKind::Cadet, email, CADET_PASSWORD)
            .principal
    }

    pub fn course(
        &self,
        hod: &Principal,
        code: &str,
        level: u16,
        semester: Semester,
        year: i32,
    ) -> Course {
        self.sims
            .create_course(
                hod,
                &CourseInput {
                    course_code: code.into(),
                    course_title: format!("{code} TITLE"),
                    dept_name: None,
                    level: Level::new(level).unwrap(),
                    unit: 2,
                    semester,
                    year,
                },
            )
            .unwrap()
    }

    pub fn assign(&self, hod: &Principal, code: &str, lecturer: &Principal) {
        self.sims
            .assign_course(
                hod,
                &AssignInput {
                    course_code: code.into(),
                    staff_id: lecturer.account.id,
                    session: None,
                },
            )
            .unwrap();
    }

    pub fn window(&self, hod: &Principal, open: bool) {
        self.sims
            .set_registration_window(
                hod,
                &WindowInput {
                    department: None,
                    open,
                },
            )
            .unwrap();
    }
}

pub fn staff_registration(pin: &str, email: &str) -> StaffRegistration {
    StaffRegistration {
        pin: pin.into(),
        sur_name: "Ayanlade".into(),
        first_name: "Kehinde".into(),
        email: email.into(),
        password: STAFF_PASSWORD.into(),
    }
}

pub fn cadet_registration(pin: &str, npa: &str, level: u16, email: &str) -> CadetRegistration {
    CadetRegistration {
        pin: pin.into(),
        npa_number: npa.into(),
        sur_name: "Musa".into(),
        first_name: "Ibrahim".into(),
        middle_name: None,
        email: email.into(),
        password: CADET_PASSWORD.into(),
        rc: 6,
        level: Level::new(level).unwrap(),
        semester: Semester::First,
        squad: 3,
        sex: Sex::M,
        dob: None,
        home_town: None,
        local_govt: None,
        state: None,
        address: None,
        next_of_kin_sur_name: None,
        next_of_kin_first_name: None,
        next_of_kin_relationship: None,
        next_of_kin_address: None,
    }
}
