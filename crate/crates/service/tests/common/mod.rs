//! In-process service harness for the HTTP tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use at_core::assets::Assets;
use at_core::profile::{TeacherProfile, TeachingUnit};
use at_core::store::{UserStore, DEFAULT_SESSION_TTL};
use at_service::jobs::{JobState, RunHook};
use at_service::{router, App, Service};
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn fixture_profile() -> TeacherProfile {
    serde_json::from_str(include_str!("../../../../fixtures/mr_jones.profile.json")).unwrap()
}

pub fn fixture_unit() -> TeachingUnit {
    serde_json::from_str(include_str!("../../../../fixtures/web-programming.unit.json")).unwrap()
}

pub fn jobs_dir(data: &Path) -> PathBuf {
    data.join("jobs")
}

pub struct Harness {
    pub dir: tempfile::TempDir,
    pub service: Arc<Service>,
    pub router: Router,
}

pub struct Reply {
    pub status: StatusCode,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or(Value::Null)
    }
}

impl Harness {
    pub fn new() -> Self {
        Self::with(DEFAULT_SESSION_TTL, None)
    }

    pub fn with(ttl: Duration, hook: Option<RunHook>) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let service = Self::start(dir.path(), ttl, hook);
        let router = router(Arc::clone(&service));
        Harness { dir, service, router }
    }

    pub fn start(data: &Path, ttl: Duration, hook: Option<RunHook>) -> Arc<Service> {
        let app = App::new(UserStore::open(data).unwrap(), Assets::shipped());
        Arc::new(Service::start(app, ttl, jobs_dir(data), hook).unwrap())
    }

    pub fn data_dir(&self) -> &Path {
        self.dir.path()
    }

    pub async fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        let mut req = Request::builder().method(method).uri(path);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        Reply { status, body }
    }

    pub async fn get(&self, path: &str, token: &str) -> Reply {
        self.call(Method::GET, path, Some(token), None).await
    }

    /// Registers `email` and logs in; returns (uid, token).
    pub async fn user(&self, email: &str) -> (u64, String) {
        let r = self
            .call(
                Method::POST,
                "/api/register",
                None,
                Some(json!({ "name": "Sentinelname", "surname": "Sentinelsurname", "email": email, "password": "correct horse" })),
            )
            .await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&r.body));
        let uid = r.json()["uid"].as_u64().unwrap();
        let r = self
            .call(Method::POST, "/api/login", None, Some(json!({ "email": email, "password": "correct horse" })))
            .await;
        assert_eq!(r.status, StatusCode::OK);
        (uid, r.json()["token"].as_str().unwrap().to_string())
    }

    pub async fn put_profile(&self, token: &str, profile: &TeacherProfile) -> Reply {
        self.call(Method::PUT, "/api/profile", Some(token), Some(serde_json::to_value(profile).unwrap())).await
    }

    pub async fn create_unit(&self, token: &str, unit: &TeachingUnit) -> Reply {
        self.call(Method::POST, "/api/units", Some(token), Some(serde_json::to_value(unit).unwrap())).await
    }

    pub async fn start_job(&self, token: &str, unit_id: &str) -> String {
        let r = self.call(Method::POST, &format!("/api/units/{unit_id}/generate"), Some(token), None).await;
        assert_eq!(r.status, StatusCode::ACCEPTED, "{}", String::from_utf8_lossy(&r.body));
        r.json()["job_id"].as_str().unwrap().to_string()
    }

    /// Polls until the job is final; returns every state seen and the last body.
    pub async fn wait_job(&self, token: &str, job_id: &str) -> (Vec<JobState>, Value) {
        let deadline = Instant::now() + Duration::from_secs(30);
        let mut seen = Vec::new();
        loop {
            let r = self.get(&format!("/api/jobs/{job_id}"), token).await;
            assert_eq!(r.status, StatusCode::OK);
            let body = r.json();
            let state: JobState = serde_json::from_value(body["state"].clone()).unwrap();
            seen.push(state);
            if state.is_final() {
                return (seen, body);
            }
            assert!(Instant::now() < deadline, "job {job_id} did not finish");
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
    }

    /// Runs a generation job to completion and asserts it succeeded.
    pub async fn generate(&self, token: &str, unit_id: &str) -> Value {
        let job = self.start_job(token, unit_id).await;
        let (_, body) = self.wait_job(token, &job).await;
        assert_eq!(body["state"], "done", "{body}");
        body
    }
}

/// Every file under `dir`, keyed by relative path.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in walk(dir) {
        let rel = entry.strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/");
        out.insert(rel, std::fs::read(&entry).unwrap());
    }
    out
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

pub fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

/// Runs the `at` binary with a clean environment.
pub fn at(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_at"))
        .args(args)
        .env_remove("AT_DATA_DIR")
        .env_remove("AT_RULES")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

/// Stdout of a successful run.
pub fn at_ok(args: &[&str]) -> String {
    let out = at(args);
    assert!(out.status.success(), "at {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Registers Jones and stores the fixture profile and unit through the CLI.
pub fn seed_cli(data: &Path) {
    let d = data.to_str().unwrap();
    let uid = at_ok(&[
        "register", "--data-dir", d, "--name", "Tom", "--surname", "Jones", "--email", "jones@example.edu", "--password",
        "correct horse",
    ]);
    assert_eq!(uid.trim(), "1");
    let profile = repo("fixtures/mr_jones.profile.json");
    let unit = repo("fixtures/web-programming.unit.json");
    at_ok(&["profile", "--data-dir", d, "--user", "jones@example.edu", "--file", profile.to_str().unwrap()]);
    at_ok(&["unit", "--data-dir", d, "--user", "jones@example.edu", "--file", unit.to_str().unwrap()]);
}

/// Sets up user A with a generated device, then probes every route with
/// user B's token. Returns the probes that did not answer 404, or leaked.
pub async fn isolation_failures(h: &Harness) -> Vec<String> {
    let (_, token_a) = h.user("a@example.edu").await;
    let (b, token_b) = h.user("b@example.edu").await;
    h.put_profile(&token_a, &fixture_profile()).await;
    h.create_unit(&token_a, &fixture_unit()).await;
    let job = h.generate(&token_a, "web-programming").await;
    let job_id = job["job_id"].as_str().unwrap().to_string();

    let mut failures = Vec::new();
    let profile_b = h.get("/api/profile", &token_b).await.json();
    if profile_b["standard"] != true || profile_b["profile"]["uid"] != b {
        failures.push(format!("B sees a non-default profile: {profile_b}"));
    }
    if h.get("/api/units", &token_b).await.json() != json!([]) {
        failures.push("B lists A's units".into());
    }
    let unit_body = serde_json::to_value(fixture_unit()).unwrap();
    let probes = [
        (Method::GET, "/api/units/web-programming".to_string(), None),
        (Method::PUT, "/api/units/web-programming".to_string(), Some(unit_body)),
        (Method::DELETE, "/api/units/web-programming".to_string(), None),
        (Method::POST, "/api/units/web-programming/generate".to_string(), None),
        (Method::GET, format!("/api/jobs/{job_id}"), None),
        (Method::GET, "/api/device/web-programming".to_string(), None),
        (Method::GET, "/api/device/web-programming/".to_string(), None),
        (Method::GET, "/api/device/web-programming/toolbox.manifest".to_string(), None),
        (Method::GET, "/api/device/web-programming/esuitcase/index.html".to_string(), None),
        (Method::GET, "/api/device/..%2F1%2Fdevice%2Fweb-programming/toolbox.manifest".to_string(), None),
    ];
    for (method, path, body) in probes {
        let r = h.call(method.clone(), &path, Some(&token_b), body).await;
        if r.status != StatusCode::NOT_FOUND || String::from_utf8_lossy(&r.body).contains("spreadsheet") {
            failures.push(format!("{method} {path} -> {}", r.status));
        }
    }
    if h.get("/api/units/web-programming", &token_a).await.status != StatusCode::OK {
        failures.push("A lost its unit".into());
    }
    failures
}

/// Generates the stored units over HTTP and again with `at gen`; returns the
/// units whose bundles differ.
pub async fn parity_failures(h: &Harness, token: &str, uid: u64, email: &str, units: &[&str]) -> Vec<String> {
    let mut failures = Vec::new();
    for unit in units {
        let device = h.data_dir().join(format!("users/{uid}/device/{unit}"));
        h.generate(token, unit).await;
        let http = read_tree(&device);
        std::fs::remove_dir_all(&device).unwrap();
        let out = at_ok(&["gen", "--data-dir", h.data_dir().to_str().unwrap(), "--user", email, "--unit", unit]);
        if Path::new(out.trim()) != device || read_tree(&device) != http || http.is_empty() {
            failures.push(unit.to_string());
        }
    }
    failures
}
