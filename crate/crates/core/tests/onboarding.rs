mod common;

use std::collections::HashSet;
use std::sync::{Arc, Barrier};

use common::*;
use proptest::prelude::*;
use sims_core::domain::{AccountKind, Designation, PinRole};
use sims_core::profile::ProfileEdit;
use sims_core::{Error, ValidationError};

#[test]
fn staff_login_works_after_registration() {
    let w = World::new();
    let pin = w.staff_pin("Computer Science");
    let staff = w
        .sims
        .register_staff(&staff_registration(&pin, "s@nda.edu.ng"), SOURCE)
        .unwrap();
    assert_eq!(staff.department, "Computer Science");
    assert_eq!(staff.faculty, "Science");
    assert!(staff.designation.is_none());
    let login = w.login(AccountKind::Staff, "s@nda.edu.ng", STAFF_PASSWORD);
    assert!(login.principal.pending_completion);
}

#[test]
fn consumed_pin_creates_no_account() {
    let w = World::new();
    let pin = w.staff_pin("Sociology");
    w.sims
        .register_staff(&staff_registration(&pin, "a@nda.edu.ng"), SOURCE)
        .unwrap();
    let err = w
        .sims
        .register_staff(&staff_registration(&pin, "b@nda.edu.ng"), SOURCE)
        .unwrap_err();
    assert!(matches!(err, Error::PinAlreadyConsumed), "{err:?}");
    let staff = w.sims.store().read(|r| r.list_staff(None)).unwrap();
    assert_eq!(staff.len(), 1);
}

#[test]
fn duplicate_email_rolls_back_the_pin() {
    let w = World::new();
    let first = w.staff_pin("Sociology");
    w.sims
        .register_staff(&staff_registration(&first, "dup@nda.edu.ng"), SOURCE)
        .unwrap();
    let second = w.staff_pin("Sociology");
    let err = w
        .sims
        .register_staff(&staff_registration(&second, "DUP@nda.edu.ng"), SOURCE)
        .unwrap_err();
    assert!(matches!(err, Error::DuplicateKey), "{err:?}");
    let pin = w.sims.store().read(|r| r.get_pin(&second)).unwrap();
    assert!(!pin.consumed);
    assert!(pin.consumed_by.is_none());
}

#[test]
fn cadet_pin_does_not_register_staff() {
    let w = World::new();
    let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
    let pin = w.cadet_pin(&hod);
    let err = w
        .sims
        .register_staff(&staff_registration(&pin, "x@nda.edu.ng"), SOURCE)
        .unwrap_err();
    assert!(matches!(err, Error::PinScopeMismatch), "{err:?}");
}

#[test]
fn unrostered_npa_leaves_the_pin_unconsumed() {
    let w = World::new();
    let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
    let pin = w.cadet_pin(&hod);
    let err = w
        .sims
        .register_cadet(
            &cadet_registration(&pin, "NPA/04/09/00187", 100, "c@nda.edu.ng"),
            SOURCE,
        )
        .unwrap_err();
    assert!(matches!(err, Error::NpaNotOnRoster), "{err:?}");
    assert!(!w.sims.store().read(|r| r.get_pin(&pin)).unwrap().consumed);
}

#[test]
fn npa_from_another_department_is_not_on_roster() {
    let w = World::new();
    let soc = w.staff("Sociology", Designation::Hod, "soc@nda.edu.ng");
    let cs = w.staff("Computer Science", Designation::Hod, "cs@nda.edu.ng");
    w.sims
        .upload_npa_roster(&cs, "Computer Science", "NPA/01/01/00001")
        .unwrap();
    let pin = w.cadet_pin(&soc);
    let err = w
        .sims
        .register_cadet(
            &cadet_registration(&pin, "NPA/01/01/00001", 100, "c@nda.edu.ng"),
            SOURCE,
        )
        .unwrap_err();
    assert!(matches!(err, Error::NpaNotOnRoster), "{err:?}");
}

#[test]
fn claimed_npa_cannot_register_twice() {
    let w = World::new();
    let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
    w.cadet(&hod, "NPA/04/09/00187", 100, "one@nda.edu.ng");
    let pin = w.cadet_pin(&hod);
    let err = w
        .sims
        .register_cadet(
            &cadet_registration(&pin, "NPA/04/09/00187", 100, "two@nda.edu.ng"),
            SOURCE,
        )
        .unwrap_err();
    assert!(matches!(err, Error::NpaAlreadyClaimed), "{err:?}");
    assert!(!w.sims.store().read(|r| r.get_pin(&pin)).unwrap().consumed);
}

#[test]
fn concurrent_registrations_sharing_one_npa() {
    let w = World::new();
    let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
    w.sims
        .upload_npa_roster(&hod, "Sociology", "NPA/04/09/00187")
        .unwrap();
    let pins: Vec<String> = (0..8).map(|_| w.cadet_pin(&hod)).collect();
    let barrier = Arc::new(Barrier::new(pins.len()));
    let handles: Vec<_> = pins
        .iter()
        .enumerate()
        .map(|(i, pin)| {
            let sims = w.sims.clone();
            let barrier = barrier.clone();
            let input =
                cadet_registration(pin, "NPA/04/09/00187", 100, &format!("c{i}@nda.edu.ng"));
            std::thread::spawn(move || {
                barrier.wait();
                sims.register_cadet(&input, SOURCE).is_ok()
            })
        })
        .collect();
    let wins = handles
        .into_iter()
        .map(|h| h.join().unwrap())
        .filter(|ok| *ok)
        .count();
    assert_eq!(wins, 1);
    let cadets = w.sims.store().read(|r| r.list_cadets(None)).unwrap();
    assert_eq!(cadets.len(), 1);
    let consumed = pins
        .iter()
        .filter(|p| w.sims.store().read(|r| r.get_pin(p)).unwrap().consumed)
        .count();
    assert_eq!(consumed, 1);
}

#[test]
fn pin_race_has_one_winner() {
    let w = World::new();
    for round in 0..5 {
        let pin = w.staff_pin("Sociology");
        let barrier = Arc::new(Barrier::new(16));
        let handles: Vec<_> = (0..16)
            .map(|i| {
                let sims = w.sims.clone();
                let barrier = barrier.clone();
                let input = staff_registration(&pin, &format!("r{round}-{i}@nda.edu.ng"));
                std::thread::spawn(move || {
                    barrier.wait();
                    sims.register_staff(&input, &format!("10.0.{round}.{i}"))
                })
            })
            .collect();
        let outcomes: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let wins = outcomes.iter().filter(|r| r.is_ok()).count();
        assert_eq!(wins, 1);
        for loss in outcomes.iter().filter_map(|r| r.as_ref().err()) {
            assert!(matches!(loss, Error::PinAlreadyConsumed), "{loss:?}");
        }
    }
    assert_eq!(
        w.sims.store().read(|r| r.list_staff(None)).unwrap().len(),
        5
    );
}

#[test]
fn pin_batches_are_distinct_and_well_formed() {
    let w = World::new();
    let pins = w
        .sims
        .generate_pins(&w.admin, PinRole::Staff, "Sociology", 500)
        .unwrap();
    let codes: HashSet<&str> = pins.iter().map(|p| p.pin_code.as_str()).collect();
    assert_eq!(codes.len(), 500);
    for code in codes {
        assert_eq!(code.len(), 8);
        assert!(code
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()));
    }
    for bad in [0, 501] {
        let err = w
            .sims
            .generate_pins(&w.admin, PinRole::Staff, "Sociology", bad)
            .unwrap_err();
        assert!(matches!(
            err,
            Error::Validation(ValidationError::CountOutOfRange)
        ));
    }
}

#[test]
fn only_the_right_roles_issue_pins() {
    let w = World::new();
    let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
    let lecturer = w.staff("Sociology", Designation::Lecturer, "l@nda.edu.ng");
    for (who, role, department) in [
        (&lecturer, PinRole::Cadet, "Sociology"),
        (&hod, PinRole::Staff, "Sociology"),
        (&hod, PinRole::Cadet, "Computer Science"),
        (&w.admin, PinRole::Cadet, "Sociology"),
    ] {
        let err = w.sims.generate_pins(who, role, department, 1).unwrap_err();
        assert!(matches!(err, Error::Unauthorized), "{err:?}");
    }
}

#[test]
fn unused_pins_can_be_revoked() {
    let w = World::new();
    let pin = w.staff_pin("Sociology");
    w.sims.delete_pin(&w.admin, PinRole::Staff, &pin).unwrap();
    let err = w
        .sims
        .register_staff(&staff_registration(&pin, "x@nda.edu.ng"), SOURCE)
        .unwrap_err();
    assert!(matches!(err, Error::PinNotFound));
    let used = w.staff_pin("Sociology");
    w.sims
        .register_staff(&staff_registration(&used, "y@nda.edu.ng"), SOURCE)
        .unwrap();
    let err = w
        .sims
        .delete_pin(&w.admin, PinRole::Staff, &used)
        .unwrap_err();
    assert!(matches!(err, Error::PinAlreadyConsumed));
}

#[test]
fn second_hod_is_refused() {
    let w = World::new();
    w.staff("Sociology", Designation::Hod, "first@nda.edu.ng");
    let pin = w.staff_pin("Sociology");
    w.sims
        .register_staff(&staff_registration(&pin, "second@nda.edu.ng"), SOURCE)
        .unwrap();
    let pending = w
        .login(AccountKind::Staff, "second@nda.edu.ng", STAFF_PASSWORD)
        .principal;
    let hod = ProfileEdit {
        designation: Some(Designation::Hod),
        ..ProfileEdit::default()
    };
    let err = w.sims.edit_own_profile(&pending, &hod).unwrap_err();
    assert!(matches!(err, Error::HodSeatTaken), "{err:?}");
    let pending = w
        .login(AccountKind::Staff, "second@nda.edu.ng", STAFF_PASSWORD)
        .principal;
    let lecturer = ProfileEdit {
        designation: Some(Designation::Lecturer),
        ..ProfileEdit::default()
    };
    let done = w.sims.edit_own_profile(&pending, &lecturer).unwrap();
    assert!(!done.principal.pending_completion);
    // Once set, the designation is not self-service any more.
    let err = w.sims.edit_own_profile(&done.principal, &hod).unwrap_err();
    assert!(matches!(err, Error::Unauthorized), "{err:?}");
}

#[test]
fn pending_staff_cannot_act_before_completion() {
    let w = World::new();
    let pin = w.staff_pin("Sociology");
    w.sims
        .register_staff(&staff_registration(&pin, "p@nda.edu.ng"), SOURCE)
        .unwrap();
    let pending = w
        .login(AccountKind::Staff, "p@nda.edu.ng", STAFF_PASSWORD)
        .principal;
    let err = w.sims.list_assigned_courses(&pending).unwrap_err();
    assert!(matches!(err, Error::Unauthorized));
    assert!(w.sims.view_own_profile(&pending).is_ok());
}

#[test]
fn roster_upload_skips_duplicates() {
    let w = World::new();
    let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
    let first = w
        .sims
        .upload_npa_roster(&hod, "Sociology", "NPA/03/02/00404")
        .unwrap();
    assert_eq!(first.accepted.len(), 1);
    let again = w
        .sims
        .upload_npa_roster(&hod, "Sociology", "NPA/03/02/00404\n")
        .unwrap();
    assert!(again.accepted.is_empty());
    assert_eq!(again.rejected.len(), 1);
    assert_eq!(again.rejected[0].reason, "duplicate");
    let err = w
        .sims
        .upload_npa_roster(&hod, "Computer Science", "NPA/03/02/00405")
        .unwrap_err();
    assert!(matches!(err, Error::Unauthorized));
    let long = "NPA/03/02/00404\n".repeat(10_001);
    let err = w
        .sims
        .upload_npa_roster(&hod, "Sociology", &long)
        .unwrap_err();
    assert!(matches!(
        err,
        Error::Validation(ValidationError::RosterTooLarge)
    ));
}

/// Independent shape check: `NPA/dd/dd/ddddd`.
fn looks_like_npa(line: &str) -> bool {
    let b = line.trim().as_bytes();
    let digit = |i: usize| b[i].is_ascii_digit();
    b.len() == 15
        && b[..4].eq_ignore_ascii_case(b"NPA/")
        && digit(4)
        && digit(5)
        && b[6] == b'/'
        && digit(7)
        && digit(8)
        && b[9] == b'/'
        && (10..15).all(digit)
}

fn roster_line() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u32..100, 0u32..100, 0u32..100_000)
            .prop_map(|(a, b, c)| format!("NPA/{a:02}/{b:02}/{c:05}")),
        "[A-Za-z0-9/]{1,18}",
        (0u32..100, 0u32..100).prop_map(|(a, b)| format!("NPA/{a:02}/{b:02}/123")),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn roster_report_matches_an_independent_count(lines in prop::collection::vec(roster_line(), 0..60)) {
        let w = World::new();
        let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
        let report = w.sims.upload_npa_roster(&hod, "Sociology", &lines.join("\n")).unwrap();
        let mut seen = HashSet::new();
        let mut valid = 0;
        let mut invalid = 0;
        for line in &lines {
            if looks_like_npa(line) {
                if seen.insert(line.to_ascii_uppercase()) {
                    valid += 1;
                } else {
                    invalid += 1;
                }
            } else {
                invalid += 1;
            }
        }
        prop_assert_eq!(report.accepted.len(), valid);
        prop_assert_eq!(report.rejected.len(), invalid);
    }

    #[test]
    fn lecturer_designation_is_always_granted(hod_first in any::<bool>(), others in 0usize..3) {
        let w = World::new();
        if hod_first {
            w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
        }
        for i in 0..others {
            w.staff("Sociology", Designation::Lecturer, &format!("l{i}@nda.edu.ng"));
        }
        let p = w.staff("Sociology", Designation::Lecturer, "last@nda.edu.ng");
        prop_assert_eq!(p.role, sims_core::domain::Role::Lecturer);
    }
}
