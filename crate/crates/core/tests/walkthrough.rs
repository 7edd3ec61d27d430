mod common;

use std::time::Instant;

use common::*;
use sims_core::domain::{grade_of, AccountKind, Designation, PinRole, Semester};
use sims_core::store::StoreError;

const NPA: &str = "NPA/04/09/00187";

#[test]
fn seeded_admin_to_cadet_result() {
    let started = Instant::now();
    let w = World::new();

    let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
    assert!(!hod.pending_completion);
    let lecturer = w.staff("Sociology", Designation::Lecturer, "lecturer@nda.edu.ng");
    let cadet = w.cadet(&hod, NPA, 100, "cadet@nda.edu.ng");

    let course = w.course(&hod, "SOC-103", 100, Semester::First, 2019);
    assert_eq!(course.unit, 2);
    w.assign(&hod, "SOC-103", &lecturer);
    w.window(&hod, true);

    let eligible = w.sims.eligible_courses(&cadet).unwrap();
    let codes: Vec<&str> = eligible.iter().map(|c| c.course_code.as_str()).collect();
    assert_eq!(codes, ["SOC-103"]);

    let regs = w
        .sims
        .register_courses(&cadet, &["SOC-103".into()])
        .unwrap();
    assert_eq!(regs.len(), 1);

    let assigned = w.sims.list_assigned_courses(&lecturer).unwrap();
    assert_eq!(assigned.len(), 1);
    let roster = w.sims.list_registered_cadets(&lecturer, "SOC-103").unwrap();
    assert_eq!(roster.len(), 1);
    assert_eq!(roster[0].npa_number.as_str(), NPA);

    let report = w
        .sims
        .upload_scores(
            &lecturer,
            "SOC-103",
            &format!("npa_number,total\n{NPA},68\n"),
        )
        .unwrap();
    assert_eq!(report.accepted.len(), 1, "{report:?}");
    assert!(report.rejected.is_empty());

    let results = w.sims.view_results(&cadet, None).unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0].course_code, "SOC-103");
    assert_eq!(results[0].total, Some(68.0));
    assert_eq!(results[0].grade, Some(grade_of(68.0).unwrap()));

    assert_pin_conservation(&w);
    assert!(started.elapsed().as_secs() < 30);
}

/// Consumed pins of each role and department equal the accounts created
/// from them, and every non-admin account is backed by a consumed pin.
fn assert_pin_conservation(w: &World) {
    w.sims
        .store()
        .read(|repo| {
            let pins = repo.list_pins(None, None)?;
            for department in ["Sociology", "Computer Science"] {
                let consumed = |role| {
                    pins.iter()
                        .filter(|p| {
                            p.consumed && p.target_role == role && p.department == department
                        })
                        .count()
                };
                let staff = repo.list_staff(Some(department))?;
                let cadets = repo.list_cadets(Some(department))?;
                assert_eq!(consumed(PinRole::Staff), staff.len());
                assert_eq!(consumed(PinRole::Cadet), cadets.len());
                for s in &staff {
                    let pin = repo.get_pin(&s.pin)?;
                    assert_eq!(
                        pin.consumed_by.map(|a| (a.kind, a.id)),
                        Some((AccountKind::Staff, s.id))
                    );
                }
                for c in &cadets {
                    let pin = repo.get_pin(&c.pin)?;
                    assert_eq!(
                        pin.consumed_by.map(|a| (a.kind, a.id)),
                        Some((AccountKind::Cadet, c.id))
                    );
                    let entry = repo.roster_entry(&c.npa_number)?.unwrap();
                    assert_eq!(entry.claimed_by, Some(c.id));
                }
            }
            Ok::<_, StoreError>(())
        })
        .unwrap();
}
