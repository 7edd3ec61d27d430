mod common;

use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate};
use common::*;
use proptest::prelude::*;
use sims_core::academics::{AssignInput, CourseUpdate, EventInput};
use sims_core::domain::{Designation, Level, Semester};
use sims_core::store::NewCourse;
use sims_core::{Error, Principal};

struct Dept {
    w: World,
    hod: Principal,
    lecturer: Principal,
}

fn sociology() -> Dept {
    let w = World::new();
    let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
    let lecturer = w.staff("Sociology", Designation::Lecturer, "lecturer@nda.edu.ng");
    Dept { w, hod, lecturer }
}

#[test]
fn course_codes_are_unique_among_live_courses() {
    let d = sociology();
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    let dup = d.w.sims.create_course(
        &d.hod,
        &sims_core::academics::CourseInput {
            course_code: "soc-103".into(),
            course_title: "AGAIN".into(),
            dept_name: None,
            level: Level::new(100).unwrap(),
            unit: 2,
            semester: Semester::First,
            year: 2019,
        },
    );
    assert!(matches!(dup, Err(Error::DuplicateKey)), "{dup:?}");
}

#[test]
fn zero_unit_course_is_rejected() {
    let d = sociology();
    let err = d.w.sims.create_course(
        &d.hod,
        &sims_core::academics::CourseInput {
            course_code: "SOC-100".into(),
            course_title: "ZERO".into(),
            dept_name: None,
            level: Level::new(100).unwrap(),
            unit: 0,
            semester: Semester::First,
            year: 2019,
        },
    );
    assert!(matches!(err, Err(Error::Validation(_))));
}

#[test]
fn soft_deleted_code_can_be_reused_and_history_stays_readable() {
    let d = sociology();
    let cadet = d.w.cadet(&d.hod, "NPA/04/09/00187", 100, "c@nda.edu.ng");
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    d.w.window(&d.hod, true);
    d.w.sims
        .register_courses(&cadet, &["SOC-103".into()])
        .unwrap();
    d.w.sims.delete_course(&d.hod, "SOC-103").unwrap();
    assert!(d.w.sims.list_courses(&d.hod).unwrap().is_empty());
    assert!(d.w.sims.eligible_courses(&cadet).unwrap().is_empty());
    let results = d.w.sims.view_results(&cadet, None).unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0].course_code, "SOC-103");

    let revived = d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    let history =
        d.w.sims
            .store()
            .read(|r| r.registrations_of(cadet.account.id))
            .unwrap();
    assert_eq!(history.len(), 1);
    assert_ne!(history[0].course_id, revived.id);
    assert!(matches!(
        d.w.sims.delete_course(&d.hod, "SOC-999"),
        Err(Error::NotFound)
    ));
}

#[test]
fn edits_are_visible_and_scoped() {
    let d = sociology();
    let cs =
        d.w.staff("Computer Science", Designation::Hod, "cs@nda.edu.ng");
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    let update = CourseUpdate {
        course_title: Some("INTRODUCTION TO SOCIOLOGY".into()),
        ..CourseUpdate::default()
    };
    let saved = d.w.sims.edit_course(&d.hod, "SOC-103", &update).unwrap();
    assert_eq!(saved.course_title, "INTRODUCTION TO SOCIOLOGY");
    assert_eq!(
        d.w.sims.list_courses(&d.hod).unwrap()[0].course_title,
        "INTRODUCTION TO SOCIOLOGY"
    );
    assert!(matches!(
        d.w.sims.edit_course(&cs, "SOC-103", &update),
        Err(Error::Unauthorized)
    ));
    assert!(matches!(
        d.w.sims.delete_course(&cs, "SOC-103"),
        Err(Error::Unauthorized)
    ));
}

#[test]
fn assignment_is_replaced_and_department_bound() {
    let d = sociology();
    let second =
        d.w.staff("Sociology", Designation::Lecturer, "second@nda.edu.ng");
    let outsider =
        d.w.staff("Computer Science", Designation::Lecturer, "out@nda.edu.ng");
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    d.w.assign(&d.hod, "SOC-103", &d.lecturer);
    assert_eq!(
        d.w.sims.list_assigned_courses(&d.lecturer).unwrap().len(),
        1
    );
    d.w.assign(&d.hod, "SOC-103", &second);
    assert!(d
        .w
        .sims
        .list_assigned_courses(&d.lecturer)
        .unwrap()
        .is_empty());
    assert_eq!(d.w.sims.list_assigned_courses(&second).unwrap().len(), 1);
    let err =
        d.w.sims
            .assign_course(
                &d.hod,
                &AssignInput {
                    course_code: "SOC-103".into(),
                    staff_id: outsider.account.id,
                    session: None,
                },
            )
            .unwrap_err();
    assert!(matches!(err, Error::CrossDepartment), "{err:?}");
}

#[test]
fn closed_window_blocks_registration() {
    let d = sociology();
    let cadet = d.w.cadet(&d.hod, "NPA/04/09/00187", 100, "c@nda.edu.ng");
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    let err =
        d.w.sims
            .register_courses(&cadet, &["SOC-103".into()])
            .unwrap_err();
    assert!(matches!(err, Error::RegistrationClosed));
    d.w.window(&d.hod, true);
    assert_eq!(
        d.w.sims
            .register_courses(&cadet, &["SOC-103".into()])
            .unwrap()
            .len(),
        1
    );
    d.w.window(&d.hod, false);
    assert!(matches!(
        d.w.sims.register_courses(&cadet, &["SOC-103".into()]),
        Err(Error::RegistrationClosed)
    ));
}

#[test]
fn registration_is_all_or_nothing_and_idempotent() {
    let d = sociology();
    let cadet = d.w.cadet(&d.hod, "NPA/04/09/00187", 100, "c@nda.edu.ng");
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    d.w.course(&d.hod, "SOC-201", 200, Semester::First, 2019);
    d.w.window(&d.hod, true);
    let err =
        d.w.sims
            .register_courses(&cadet, &["SOC-103".into(), "MTH-999".into()])
            .unwrap_err();
    assert!(
        matches!(&err, Error::IneligibleCourse(code) if code == "MTH-999"),
        "{err:?}"
    );
    let err =
        d.w.sims
            .register_courses(&cadet, &["SOC-201".into()])
            .unwrap_err();
    assert!(matches!(&err, Error::IneligibleCourse(code) if code == "SOC-201"));
    assert!(d
        .w
        .sims
        .store()
        .read(|r| r.registrations_of(cadet.account.id))
        .unwrap()
        .is_empty());
    for _ in 0..2 {
        d.w.sims
            .register_courses(&cadet, &["SOC-103".into(), "soc-103".into()])
            .unwrap();
    }
    assert_eq!(
        d.w.sims
            .store()
            .read(|r| r.registrations_of(cadet.account.id))
            .unwrap()
            .len(),
        1
    );
}

#[test]
fn promotion_changes_eligibility() {
    let d = sociology();
    let cadet = d.w.cadet(&d.hod, "NPA/04/09/00187", 100, "c@nda.edu.ng");
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    d.w.course(&d.hod, "SOC-201", 200, Semester::First, 2019);
    d.w.sims
        .edit_cadet(
            &d.hod,
            &sims_core::profile::CadetUpdate {
                id: cadet.account.id,
                level: Some(Level::new(200).unwrap()),
                ..Default::default()
            },
        )
        .unwrap();
    let codes: Vec<String> =
        d.w.sims
            .eligible_courses(&cadet)
            .unwrap()
            .into_iter()
            .map(|c| c.course_code)
            .collect();
    assert_eq!(codes, ["SOC-201"]);
}

#[test]
fn score_upload_reports_each_row() {
    let d = sociology();
    let cadet = d.w.cadet(&d.hod, "NPA/04/09/00187", 100, "c@nda.edu.ng");
    d.w.cadet(&d.hod, "NPA/04/09/00188", 100, "d@nda.edu.ng");
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    d.w.assign(&d.hod, "SOC-103", &d.lecturer);
    d.w.window(&d.hod, true);
    d.w.sims
        .register_courses(&cadet, &["SOC-103".into()])
        .unwrap();
    let csv = "npa_number,total\nNPA/04/09/00187,68\nNPA/04/09/00188,50\nNPA/04/09/00187,101\nNPA/bad,40\nNPA/04/09/00187,x\n";
    let report = d.w.sims.upload_scores(&d.lecturer, "SOC-103", csv).unwrap();
    assert_eq!(report.accepted.len(), 1);
    assert_eq!(
        report.accepted[0].grade,
        sims_core::domain::grade_of(68.0).unwrap()
    );
    let reasons: Vec<&str> = report.rejected.iter().map(|r| r.reason).collect();
    assert_eq!(
        reasons,
        [
            "not_registered",
            "score_out_of_range",
            "malformed_npa_number",
            "invalid_total"
        ]
    );
    assert_eq!(report.rejected[0].line, 3);

    let mark = d.w.sims.audit_high_water_mark().unwrap();
    d.w.sims
        .upload_scores(&d.hod, "SOC-103", "npa_number,total\nNPA/04/09/00187,72\n")
        .unwrap();
    let results = d.w.sims.view_results(&cadet, None).unwrap();
    assert_eq!(results[0].total, Some(72.0));
    let audit =
        d.w.sims
            .audit_records_since(mark, Some("upload_scores"))
            .unwrap();
    assert_eq!(audit[0].details["changes"][0]["prior"], 68.0);

    assert!(d
        .w
        .sims
        .upload_scores(&d.lecturer, "SOC-103", "npa,total\n")
        .is_err());
}

#[test]
fn unassigned_lecturer_cannot_touch_a_course() {
    let d = sociology();
    let other =
        d.w.staff("Sociology", Designation::Lecturer, "other@nda.edu.ng");
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    d.w.assign(&d.hod, "SOC-103", &d.lecturer);
    let csv = "npa_number,total\n";
    assert!(matches!(
        d.w.sims.upload_scores(&other, "SOC-103", csv),
        Err(Error::Unauthorized)
    ));
    assert!(matches!(
        d.w.sims.list_registered_cadets(&other, "SOC-103"),
        Err(Error::Unauthorized)
    ));
    assert!(d.w.sims.list_registered_cadets(&d.hod, "SOC-103").is_ok());
}

#[test]
fn cadets_see_only_their_own_results() {
    let d = sociology();
    let a = d.w.cadet(&d.hod, "NPA/04/09/00187", 100, "a@nda.edu.ng");
    let b = d.w.cadet(&d.hod, "NPA/04/09/00188", 100, "b@nda.edu.ng");
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    d.w.window(&d.hod, true);
    for cadet in [&a, &b] {
        d.w.sims
            .register_courses(cadet, &["SOC-103".into()])
            .unwrap();
    }
    let mine = d.w.sims.view_results(&a, None).unwrap();
    assert!(mine.iter().all(|r| r.cadet_id == a.account.id));
    assert_eq!(mine[0].total, None);
    for target in [b.account.id, 9999] {
        assert!(matches!(
            d.w.sims.view_results(&a, Some(target)),
            Err(Error::Unauthorized)
        ));
    }
    assert!(matches!(
        d.w.sims.view_results(&d.w.admin, Some(a.account.id)),
        Err(Error::Unauthorized)
    ));
    let all = d.w.sims.department_results(&d.hod).unwrap();
    assert_eq!(all.len(), 2);
}

fn pdf(len: usize) -> Vec<u8> {
    let mut bytes = b"%PDF-1.4\n".to_vec();
    bytes.extend((0..len).map(|i| (i % 251) as u8));
    bytes
}

#[test]
fn materials_round_trip_sealed_at_rest() {
    let d = sociology();
    let cadet = d.w.cadet(&d.hod, "NPA/04/09/00187", 100, "c@nda.edu.ng");
    let outsider = d.w.cadet(&d.hod, "NPA/04/09/00188", 100, "o@nda.edu.ng");
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    d.w.assign(&d.hod, "SOC-103", &d.lecturer);
    d.w.window(&d.hod, true);
    d.w.sims
        .register_courses(&cadet, &["SOC-103".into()])
        .unwrap();

    let content = pdf(1024 * 1024);
    let material =
        d.w.sims
            .upload_material(&d.lecturer, "SOC-103", "../../etc/passwd.pdf", &content)
            .unwrap();
    assert_eq!(material.original_filename, "passwd.pdf");
    assert!(!material.stored_name.contains('/') && !material.stored_name.contains('\\'));
    let uploads = d.w.dir.path().join("uploads");
    let on_disk = std::fs::read(uploads.join(&material.stored_name)).unwrap();
    assert!(!on_disk.windows(8).any(|w| w == b"%PDF-1.4"));
    for entry in std::fs::read_dir(&uploads).unwrap() {
        let path = entry.unwrap().path();
        assert!(path.starts_with(&uploads));
    }

    let listed = d.w.sims.list_materials(&cadet).unwrap();
    assert_eq!(listed.len(), 1);
    assert!(d.w.sims.list_materials(&outsider).unwrap().is_empty());
    let (meta, bytes) = d.w.sims.download_material(&cadet, material.id).unwrap();
    assert_eq!(meta.id, material.id);
    assert_eq!(bytes, content);
    assert!(matches!(
        d.w.sims.download_material(&outsider, material.id),
        Err(Error::Unauthorized)
    ));
    assert!(matches!(
        d.w.sims.download_material(&d.lecturer, material.id),
        Err(Error::Unauthorized)
    ));

    let mut tampered = on_disk.clone();
    let last = tampered.len() - 1;
    tampered[last] ^= 1;
    std::fs::write(uploads.join(&material.stored_name), tampered).unwrap();
    assert!(matches!(
        d.w.sims.download_material(&cadet, material.id),
        Err(Error::IntegrityFailure)
    ));
}

#[test]
fn oversized_and_disallowed_uploads_are_refused() {
    let d = sociology();
    d.w.course(&d.hod, "SOC-103", 100, Semester::First, 2019);
    d.w.assign(&d.hod, "SOC-103", &d.lecturer);
    let big = pdf(11 * 1024 * 1024);
    assert!(matches!(
        d.w.sims
            .upload_material(&d.lecturer, "SOC-103", "big.pdf", &big),
        Err(Error::FileTooLarge)
    ));
    for (name, body) in [
        ("run.sh", b"#!/bin/sh".as_slice()),
        ("fake.pdf", b"MZ\x90\x00".as_slice()),
    ] {
        assert!(matches!(
            d.w.sims.upload_material(&d.lecturer, "SOC-103", name, body),
            Err(Error::DisallowedType)
        ));
    }
}

#[test]
fn events_are_listed_newest_first() {
    let w = World::new();
    let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
    let date = NaiveDate::from_ymd_opt(2019, 9, 1).unwrap();
    let mut created = Vec::new();
    for i in 0..5 {
        let input = EventInput {
            title: format!("Event {i}"),
            body: "Parade at 0800".into(),
            event_date: date,
        };
        created.push(w.sims.create_event(&w.admin, &input).unwrap());
        if i % 2 == 0 {
            w.clock.advance(Duration::seconds(1));
        }
    }
    let listed = w.sims.list_events(&hod).unwrap();
    let mut expected = created.clone();
    expected.sort_by(|a, b| b.created_at.cmp(&a.created_at).then(b.id.cmp(&a.id)));
    assert_eq!(listed, expected);
    let err = w.sims.create_event(
        &hod,
        &EventInput {
            title: "x".into(),
            body: "y".into(),
            event_date: date,
        },
    );
    assert!(matches!(err, Err(Error::Unauthorized)));
}

#[test]
fn department_lists_partition_the_cadets() {
    let w = World::new();
    let soc = w.staff("Sociology", Designation::Hod, "soc@nda.edu.ng");
    let cs = w.staff("Computer Science", Designation::Hod, "cs@nda.edu.ng");
    for i in 0..3 {
        w.cadet(
            &soc,
            &format!("NPA/01/01/0000{i}"),
            100,
            &format!("s{i}@nda.edu.ng"),
        );
    }
    for i in 0..2 {
        w.cadet(
            &cs,
            &format!("NPA/02/02/0000{i}"),
            100,
            &format!("c{i}@nda.edu.ng"),
        );
    }
    let a: BTreeSet<i64> = w
        .sims
        .list_cadets(&soc)
        .unwrap()
        .iter()
        .map(|c| c.id)
        .collect();
    let b: BTreeSet<i64> = w
        .sims
        .list_cadets(&cs)
        .unwrap()
        .iter()
        .map(|c| c.id)
        .collect();
    let all: BTreeSet<i64> = w
        .sims
        .store()
        .read(|r| r.list_cadets(None))
        .unwrap()
        .iter()
        .map(|c| c.id)
        .collect();
    assert!(a.is_disjoint(&b));
    assert_eq!(a.union(&b).copied().collect::<BTreeSet<_>>(), all);
    let empty = w.staff("Sociology", Designation::Lecturer, "l@nda.edu.ng");
    assert!(w.sims.list_cadets(&empty).is_err());
}

const DEPTS: [&str; 2] = ["Sociology", "Computer Science"];

fn catalog() -> impl Strategy<Value = Vec<(usize, u16, bool, i32, bool)>> {
    prop::collection::vec(
        (
            0usize..2,
            1u16..=5,
            any::<bool>(),
            2018i32..=2020,
            prop::bool::weighted(0.2),
        ),
        0..200,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn eligibility_equals_a_full_scan(rows in catalog(), level in 1u16..=5) {
        let w = World::new();
        let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
        let cadet = w.cadet(&hod, "NPA/04/09/00187", level * 100, "c@nda.edu.ng");
        w.sims.store().within_transaction(|repo| {
            for (i, (dept, lvl, first, year, deleted)) in rows.iter().enumerate() {
                let course = repo.insert_course(&NewCourse {
                    course_code: format!("C-{i:03}"),
                    course_title: "T".into(),
                    dept_name: DEPTS[*dept].into(),
                    level: Level::new(lvl * 100).unwrap(),
                    unit: 1,
                    semester: if *first { Semester::First } else { Semester::Second },
                    year: *year,
                })?;
                if *deleted {
                    repo.soft_delete_course(course.id)?;
                }
            }
            Ok::<_, sims_core::store::StoreError>(())
        }).unwrap();
        let got: Vec<String> = w.sims.eligible_courses(&cadet).unwrap().into_iter().map(|c| c.course_code).collect();
        let session = w.sims.current_session().unwrap();
        let me = w.sims.store().read(|r| r.get_cadet(cadet.account.id)).unwrap();
        let mut expected: Vec<String> = w.sims.store().read(|r| r.list_all_courses()).unwrap()
            .into_iter()
            .filter(|c| c.deleted_at.is_none()
                && c.dept_name == me.department
                && c.level == me.level
                && c.semester == session.current_semester
                && c.year == session.year)
            .map(|c| c.course_code)
            .collect();
        expected.sort();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn roster_equals_a_brute_force_join(picks in prop::collection::vec(prop::collection::vec(any::<bool>(), 3), 1..6)) {
        let w = World::new();
        let hod = w.staff("Sociology", Designation::Hod, "hod@nda.edu.ng");
        for code in ["SOC-101", "SOC-102", "SOC-103"] {
            w.course(&hod, code, 100, Semester::First, 2019);
        }
        w.window(&hod, true);
        let mut cadets = Vec::new();
        for (i, pick) in picks.iter().enumerate() {
            let cadet = w.cadet(&hod, &format!("NPA/04/09/{i:05}"), 100, &format!("c{i}@nda.edu.ng"));
            let codes: Vec<String> = ["SOC-101", "SOC-102", "SOC-103"]
                .iter()
                .zip(pick)
                .filter(|(_, on)| **on)
                .map(|(c, _)| c.to_string())
                .collect();
            w.sims.register_courses(&cadet, &codes).unwrap();
            cadets.push(cadet);
        }
        for code in ["SOC-101", "SOC-102", "SOC-103"] {
            let got: BTreeSet<i64> = w.sims.list_registered_cadets(&hod, code).unwrap().iter().map(|r| r.cadet_id).collect();
            let expected: BTreeSet<i64> = w.sims.store().read(|r| {
                let course = r.live_course_by_code(code)?.unwrap();
                let mut ids = BTreeSet::new();
                for c in r.list_cadets(None)? {
                    if r.registrations_of(c.id)?.iter().any(|reg| reg.course_id == course.id && reg.session == 2019) {
                        ids.insert(c.id);
                    }
                }
                Ok::<_, sims_core::store::StoreError>(ids)
            }).unwrap();
            prop_assert_eq!(got, expected);
        }
    }
}
