mod common;

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use reqwest::Method;
use serde_json::{json, Value};
use sims_core::routes::{Body, ROUTES};
use sims_core::{Sims, SystemClock};
use sims_server::{BackgroundServer, CookiePolicy, ServeError};

fn assert_security_headers(response: &reqwest::blocking::Response) {
    let h = response.headers();
    assert_eq!(h["x-content-type-options"], "nosniff");
    assert_eq!(h["x-frame-options"], "DENY");
    assert!(h["content-security-policy"]
        .to_str()
        .unwrap()
        .contains("default-src 'none'"));
}

#[test]
fn health_reports_ok_with_headers() {
    let server = TestServer::start();
    let response = server.anonymous().get("/health");
    assert_eq!(response.status(), 200);
    assert_security_headers(&response);
    assert_eq!(
        response.headers()["content-type"],
        "application/json; charset=utf-8"
    );
    assert_eq!(body(response), json!({ "status": "ok" }));
}

#[test]
fn occupied_port_is_a_bind_failure() {
    let server = TestServer::start();
    let addr = server.server.as_ref().unwrap().local_addr();
    let err = BackgroundServer::start(server.sims.clone(), addr, CookiePolicy::default())
        .err()
        .unwrap();
    assert!(matches!(err, ServeError::BindFailure { .. }), "{err}");
}

#[test]
fn unmigrated_storage_refuses_to_serve() {
    let dir = tempfile::tempdir().unwrap();
    let sims = Sims::open(config(&dir), Arc::new(SystemClock)).unwrap();
    let err = BackgroundServer::start(
        sims,
        "127.0.0.1:0".parse().unwrap(),
        CookiePolicy::default(),
    )
    .err()
    .unwrap();
    assert!(matches!(err, ServeError::NotMigrated), "{err}");
}

#[test]
fn shutdown_lets_an_in_flight_request_finish() {
    let mut server = TestServer::start();
    let running = server.server.take().unwrap();
    let addr = running.local_addr();
    let payload = br#"{"email":"nobody@nda.edu.ng","password":"whatever-pass"}"#;
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "POST /api/cadet/login HTTP/1.1\r\nHost: test\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        payload.len()
    )
    .unwrap();
    stream.write_all(&payload[..10]).unwrap();
    stream.flush().unwrap();
    std::thread::sleep(Duration::from_millis(200));

    let stopper = std::thread::spawn(move || {
        let started = Instant::now();
        running.shutdown().unwrap();
        started.elapsed()
    });
    std::thread::sleep(Duration::from_millis(500));
    assert!(
        !stopper.is_finished(),
        "server stopped before the request completed"
    );
    stream.write_all(&payload[10..]).unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    assert!(response.starts_with("HTTP/1.1 401"), "{response}");
    let waited = stopper.join().unwrap();
    assert!(waited >= Duration::from_millis(500));
    assert!(
        TcpStream::connect(addr).is_err(),
        "still accepting after shutdown"
    );
}

#[test]
fn every_route_is_served() {
    let server = TestServer::start();
    let client = server.anonymous();
    for route in ROUTES {
        let path = route.concrete(|_| "1".into());
        let method = Method::from_bytes(route.method.as_str().as_bytes()).unwrap();
        let response = client.request(method, &path).send().unwrap();
        let status = response.status().as_u16();
        let code = error_code(response);
        assert_ne!(status, 405, "{} {}", route.method.as_str(), route.path);
        if route.requires_session() {
            assert_eq!(
                (status, code.as_str()),
                (401, "invalid_session"),
                "{} {}",
                route.method.as_str(),
                route.path
            );
        } else {
            assert_ne!(
                code,
                "not_found",
                "{} {}",
                route.method.as_str(),
                route.path
            );
        }
    }
}

#[test]
fn unknown_routes_and_methods_get_json_errors() {
    let server = TestServer::start();
    let client = server.anonymous();
    let missing = client.get("/api/nothing-here");
    assert_eq!(missing.status(), 404);
    assert_security_headers(&missing);
    assert_eq!(error_code(missing), "not_found");
    let wrong = client.request(Method::PUT, "/health").send().unwrap();
    assert_eq!(wrong.status(), 405);
    assert_eq!(error_code(wrong), "method_not_allowed");
}

#[test]
fn state_changes_need_the_session_csrf_token() {
    let server = TestServer::start();
    let mut admin = server.admin();
    let token = admin.csrf.take().unwrap();
    let course = json!({ "course_code": "SOC-103", "course_title": "T", "level": 100, "unit": 2, "semester": "first", "year": 2019 });
    let missing = admin.post("/api/hod/courses", &course);
    assert_eq!(missing.status(), 403);
    assert_eq!(error_code(missing), "csrf_mismatch");

    for route in ROUTES.iter().filter(|r| r.requires_csrf()) {
        let method = Method::from_bytes(route.method.as_str().as_bytes()).unwrap();
        let path = route.concrete(|_| "1".into());
        for header in [None, Some("not-the-token"), Some(&token[..token.len() - 1])] {
            let mut request = admin.request(method.clone(), &path);
            if let Some(value) = header {
                request = request.header(sims_server::CSRF_HEADER, value);
            }
            let response = request.send().unwrap();
            assert_eq!(
                response.status(),
                403,
                "{} {path} {header:?}",
                route.method.as_str()
            );
            assert_eq!(error_code(response), "csrf_mismatch");
        }
    }
    admin.csrf = Some(token);
    assert_eq!(
        admin.get("/api/me").status(),
        200,
        "session survived the sweep"
    );
}

#[test]
fn login_is_throttled_on_the_sixth_failure() {
    let server = TestServer::start();
    let client = server.anonymous();
    for attempt in 1..=6 {
        let response = client.post(
            "/api/admin/login",
            &json!({ "email": ADMIN_EMAIL, "password": "wrong-password" }),
        );
        let expected = if attempt <= 5 { 401 } else { 429 };
        assert_eq!(response.status(), expected, "attempt {attempt}");
    }
    let locked = client.post(
        "/api/admin/login",
        &json!({ "email": ADMIN_EMAIL, "password": ADMIN_PASSWORD }),
    );
    assert_eq!(error_code(locked), "throttled");
}

#[test]
fn login_sets_a_hardened_cookie_and_rotates_tokens() {
    let server = TestServer::start();
    let response = server.anonymous().post(
        "/api/admin/login",
        &json!({ "email": ADMIN_EMAIL, "password": ADMIN_PASSWORD }),
    );
    let cookie = response.headers()["set-cookie"]
        .to_str()
        .unwrap()
        .to_owned();
    for attribute in ["HttpOnly", "SameSite=Lax", "Path=/"] {
        assert!(cookie.contains(attribute), "{cookie}");
    }
    let outcome = body(response);
    assert!(outcome.get("token").is_none());
    assert_eq!(outcome["principal"]["role"], "admin");

    let mut session = server.admin();
    let before = session.token.clone().unwrap();
    session.login("admin", ADMIN_EMAIL, ADMIN_PASSWORD);
    let after = session.token.clone().unwrap();
    assert_ne!(before, after);
    let mut stale = server.anonymous();
    stale.token = Some(before);
    assert_eq!(stale.get("/api/me").status(), 401);
    assert_eq!(session.get("/api/me").status(), 200);

    let logout = session.post("/api/logout", &json!({}));
    assert_eq!(logout.status(), 200);
    assert!(logout.headers()["set-cookie"]
        .to_str()
        .unwrap()
        .contains("Max-Age=0"));
    assert_eq!(session.get("/api/me").status(), 401);
}

#[test]
fn malformed_requests_get_sanitized_client_errors() {
    let server = TestServer::start();
    let admin = server.admin();
    let cases: Vec<(reqwest::blocking::RequestBuilder, u16, &str)> = vec![
        (
            admin
                .request(Method::POST, "/api/admin/events")
                .header("content-type", "application/json")
                .body("{\"title\":"),
            400,
            "malformed_body",
        ),
        (
            admin
                .request(Method::POST, "/api/admin/events")
                .header("content-type", "text/xml")
                .body("<event/>"),
            415,
            "unsupported_media_type",
        ),
        (
            admin
                .request(Method::PATCH, "/api/me")
                .json(&json!({ "role": "admin" })),
            422,
            "invalid_body",
        ),
        (
            admin.request(Method::GET, "/api/cadet/materials/abc"),
            403,
            "forbidden",
        ),
        (
            admin
                .request(Method::POST, "/api/admin/events")
                .json(&json!({ "title": "x".repeat(2 * 1024 * 1024) })),
            413,
            "payload_too_large",
        ),
    ];
    for (request, status, code) in cases {
        let response = request.send().unwrap();
        assert_eq!(response.status(), status, "{code}");
        assert_security_headers(&response);
        let text = response.text().unwrap();
        for leak in ["sqlite", "SELECT", ".rs:", "panicked"] {
            assert!(!text.contains(leak), "{text}");
        }
        assert_eq!(
            serde_json::from_str::<Value>(&text).unwrap()["error"]["code"],
            code
        );
    }
}

#[test]
fn stored_markup_is_returned_escaped_as_json() {
    let server = TestServer::start();
    let admin = server.admin();
    let payload = "<script>alert(1)</script>";
    let created = admin.post(
        "/api/admin/events",
        &json!({ "title": payload, "body": payload, "event_date": "2019-09-01" }),
    );
    assert_eq!(created.status(), 201);
    let listed = admin.get("/api/events");
    assert_eq!(
        listed.headers()["content-type"],
        "application/json; charset=utf-8"
    );
    let text = listed.text().unwrap();
    assert!(!text.contains(payload), "{text}");
    assert_eq!(
        serde_json::from_str::<Value>(&text).unwrap()[0]["title"],
        payload
    );
}

#[test]
fn full_flow_over_http() {
    let server = TestServer::start();
    let admin = server.admin();
    let hod = staff(&server, &admin, "Sociology", "hod", "hod@nda.edu.ng");
    let lecturer = staff(&server, &admin, "Sociology", "lecturer", "lect@nda.edu.ng");
    let cadet_a = cadet(&server, &hod, "NPA/04/09/00187", "a@nda.edu.ng");
    let cadet_b = cadet(&server, &hod, "NPA/04/09/00188", "b@nda.edu.ng");

    let course = json!({ "course_code": "SOC-103", "course_title": "INTRODUCTION TO SOCIOLOGY", "level": 100, "unit": 2, "semester": "first", "year": 2019 });
    assert_eq!(hod.post("/api/hod/courses", &course).status(), 201);
    let lecturer_id = body(lecturer.get("/api/me"))["principal"]["account"]["id"].clone();
    assert_eq!(
        hod.post(
            "/api/hod/assignments",
            &json!({ "course_code": "SOC-103", "staff_id": lecturer_id })
        )
        .status(),
        201
    );
    let closed = cadet_a.post(
        "/api/cadet/registrations",
        &json!({ "course_codes": ["SOC-103"] }),
    );
    assert_eq!(
        (closed.status().as_u16(), error_code(closed).as_str()),
        (409, "registration_closed")
    );
    assert_eq!(
        hod.post("/api/hod/registration-window", &json!({ "open": true }))
            .status(),
        200
    );
    let eligible = body(cadet_a.get("/api/cadet/eligible-courses"));
    assert_eq!(eligible.as_array().unwrap().len(), 1);
    assert_eq!(eligible[0]["course_code"], "SOC-103");
    for c in [&cadet_a, &cadet_b] {
        assert_eq!(
            c.post(
                "/api/cadet/registrations",
                &json!({ "course_codes": ["SOC-103"] })
            )
            .status(),
            200
        );
    }

    let report = lecturer
        .request(Method::POST, "/api/lecturer/courses/SOC-103/scores")
        .header("content-type", "text/csv")
        .body("npa_number,total\nNPA/04/09/00187,68\nNPA/04/09/00188,101\n")
        .send()
        .unwrap();
    let report = body(report);
    assert_eq!(report["accepted"].as_array().unwrap().len(), 1);
    assert_eq!(report["rejected"][0]["reason"], "score_out_of_range");

    let results = body(cadet_a.get("/api/cadet/results"));
    assert_eq!(results.as_array().unwrap().len(), 1);
    assert_eq!(results[0]["course_code"], "SOC-103");
    assert_eq!(results[0]["total"], 68.0);
    let b_id = body(cadet_b.get("/api/me"))["principal"]["account"]["id"]
        .as_i64()
        .unwrap();
    let horizontal = cadet_a.get(&format!("/api/cadet/results?cadet_id={b_id}"));
    assert_eq!(horizontal.status(), 403);
    assert_eq!(cadet_a.get("/api/admin/staff").status(), 403);
    assert_eq!(
        body(hod.get("/api/hod/results")).as_array().unwrap().len(),
        2
    );

    let mut pdf = b"%PDF-1.4\n".to_vec();
    pdf.extend(std::iter::repeat_n(b'x', 4096));
    let form = reqwest::blocking::multipart::Form::new().part(
        "file",
        reqwest::blocking::multipart::Part::bytes(pdf.clone()).file_name("../notes.pdf"),
    );
    let uploaded = lecturer
        .request(Method::POST, "/api/lecturer/courses/SOC-103/materials")
        .multipart(form)
        .send()
        .unwrap();
    assert_eq!(uploaded.status(), 201);
    let material = body(uploaded);
    assert_eq!(material["original_filename"], "notes.pdf");
    let listed = body(cadet_a.get("/api/cadet/materials"));
    let id = listed[0]["id"].as_i64().unwrap();
    let download = cadet_a.get(&format!("/api/cadet/materials/{id}"));
    assert_eq!(download.status(), 200);
    assert_security_headers(&download);
    assert_eq!(
        download.headers()["content-type"],
        "application/octet-stream"
    );
    assert!(download.headers()["content-disposition"]
        .to_str()
        .unwrap()
        .starts_with("attachment"));
    assert_eq!(download.bytes().unwrap().to_vec(), pdf);

    let big = reqwest::blocking::multipart::Form::new().part(
        "file",
        reqwest::blocking::multipart::Part::bytes(vec![b'%'; 10 * 1024 * 1024 + 1])
            .file_name("big.pdf"),
    );
    let refused = lecturer
        .request(Method::POST, "/api/lecturer/courses/SOC-103/materials")
        .multipart(big)
        .send()
        .unwrap();
    assert_eq!(refused.status(), 413);
}

#[test]
fn route_table_bodies_match_handlers() {
    let server = TestServer::start();
    let admin = server.admin();
    for route in ROUTES
        .iter()
        .filter(|r| r.requires_csrf() && r.body == Body::Json)
    {
        let method = Method::from_bytes(route.method.as_str().as_bytes()).unwrap();
        let response = admin
            .request(method, &route.concrete(|_| "1".into()))
            .header("content-type", "text/plain")
            .body("x")
            .send()
            .unwrap();
        let status = response.status().as_u16();
        assert!(
            status == 415 || status == 403,
            "{} {} -> {status}",
            route.method.as_str(),
            route.path
        );
    }
}
