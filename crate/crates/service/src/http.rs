//! JSON API over [`App`].

use std::path::{Component, Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use at_core::device::TOOLBOX_FILE;
use at_core::profile::{TeacherProfile, TeachingUnit, Uid};
use at_core::store::{Sessions, StoreError};
use axum::extract::{FromRequestParts, Path as UrlPath, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::app::{App, AppError, QuizSubmission};
use crate::jobs::{device_locator, Job, JobError, JobQueue, RunHook};

/// Everything a request handler needs.
#[derive(Debug)]
pub struct Service {
    pub app: Arc<App>,
    pub sessions: Sessions,
    pub jobs: JobQueue,
}

impl Service {
    pub fn start(app: App, session_ttl: Duration, jobs_dir: PathBuf, hook: Option<RunHook>) -> Result<Self, JobError> {
        let app = Arc::new(app);
        let jobs = JobQueue::start(Arc::clone(&app), jobs_dir, hook)?;
        Ok(Service { app, sessions: Sessions::new(session_ttl), jobs })
    }
}

type Shared = Arc<Service>;

/// An error response: status plus a JSON body with at least an `error` field.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl std::fmt::Display) -> Self {
        ApiError { status, body: json!({ "error": message.to_string() }) }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        tracing::error!(error = %e, "request failed");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal error")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::DuplicateEmail => ApiError::new(StatusCode::CONFLICT, e),
            StoreError::AuthFailed => ApiError::new(StatusCode::UNAUTHORIZED, e),
            StoreError::InvalidRegistration(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e),
            StoreError::UnknownUser(_) => ApiError::new(StatusCode::UNAUTHORIZED, "unknown user"),
            StoreError::InvalidUnitId(_) => ApiError::new(StatusCode::NOT_FOUND, e),
            other => ApiError::internal(other),
        }
    }
}

impl From<AppError> for ApiError {
    fn from(e: AppError) -> Self {
        match e {
            AppError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, e),
            AppError::Conflict(_) => ApiError::new(StatusCode::CONFLICT, e),
            AppError::Invalid(violations) => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: json!({ "error": "validation failed", "violations": violations }),
            },
            AppError::IncompleteQuiz { missing } => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: json!({ "error": "questionnaire incomplete", "missing": missing }),
            },
            AppError::Quiz(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e),
            AppError::Store(s) => s.into(),
            other => ApiError::internal(other),
        }
    }
}

impl From<JobError> for ApiError {
    fn from(e: JobError) -> Self {
        ApiError::internal(e)
    }
}

/// Runs store work off the async executor.
async fn blocking<T, E>(f: impl FnOnce() -> Result<T, E> + Send + 'static) -> Result<T, ApiError>
where
    T: Send + 'static,
    E: Into<ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?.map_err(Into::into)
}

/// The caller, identified by a live bearer token.
#[derive(Debug, Clone, Copy)]
pub struct Caller(pub Uid);

impl FromRequestParts<Shared> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "missing bearer token"))?;
        state
            .sessions
            .resolve(token.trim())
            .map(Caller)
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "invalid or expired token"))
    }
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/api/register", post(register))
        .route("/api/login", post(login))
        .route("/api/profile", get(get_profile).put(put_profile))
        .route("/api/profile/quiz", post(post_quiz))
        .route("/api/units", get(list_units).post(create_unit))
        .route("/api/units/{unit_id}", get(get_unit).put(put_unit).delete(delete_unit))
        .route("/api/units/{unit_id}/generate", post(generate))
        .route("/api/jobs/{job_id}", get(get_job))
        .route("/api/device/{unit_id}", get(device_listing))
        .route("/api/device/{unit_id}/", get(device_listing))
        .route("/api/device/{unit_id}/{*path}", get(device_file))
        .with_state(service)
}

#[derive(Debug, Deserialize)]
pub struct Registration {
    pub name: String,
    pub surname: String,
    pub email: String,
    pub password: String,
}

#[derive(Debug, Deserialize)]
pub struct Login {
    pub email: String,
    pub password: String,
}

#[derive(Debug, Serialize)]
struct LoginReply {
    token: String,
    uid: Uid,
}

async fn register(State(s): State<Shared>, Json(r): Json<Registration>) -> Result<impl IntoResponse, ApiError> {
    let uid = blocking(move || s.app.store.register(&r.name, &r.surname, &r.email, &r.password)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "uid": uid }))))
}

async fn login(State(s): State<Shared>, Json(l): Json<Login>) -> Result<impl IntoResponse, ApiError> {
    let store_side = Arc::clone(&s);
    let uid = blocking(move || store_side.app.store.authenticate(&l.email, &l.password)).await?;
    let session = s.sessions.issue(uid);
    Ok(Json(LoginReply { token: session.token, uid }))
}

async fn get_profile(State(s): State<Shared>, Caller(uid): Caller) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(move || s.app.load_profile(uid)).await?))
}

async fn put_profile(
    State(s): State<Shared>,
    Caller(uid): Caller,
    Json(p): Json<TeacherProfile>,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(move || s.app.save_profile(uid, p)).await?))
}

async fn post_quiz(
    State(s): State<Shared>,
    Caller(uid): Caller,
    Json(q): Json<QuizSubmission>,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(move || s.app.apply_quiz(uid, &q)).await?))
}

async fn list_units(State(s): State<Shared>, Caller(uid): Caller) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(move || s.app.list_units(uid)).await?))
}

async fn create_unit(
    State(s): State<Shared>,
    Caller(uid): Caller,
    Json(u): Json<TeachingUnit>,
) -> Result<impl IntoResponse, ApiError> {
    let unit = blocking(move || s.app.create_unit(uid, &u).map(|()| u)).await?;
    Ok((StatusCode::CREATED, Json(unit)))
}

async fn get_unit(
    State(s): State<Shared>,
    Caller(uid): Caller,
    UrlPath(unit_id): UrlPath<String>,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(move || s.app.get_unit(uid, &unit_id)).await?))
}

async fn put_unit(
    State(s): State<Shared>,
    Caller(uid): Caller,
    UrlPath(unit_id): UrlPath<String>,
    Json(u): Json<TeachingUnit>,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(blocking(move || s.app.update_unit(uid, &unit_id, &u).map(|()| u)).await?))
}

async fn delete_unit(
    State(s): State<Shared>,
    Caller(uid): Caller,
    UrlPath(unit_id): UrlPath<String>,
) -> Result<impl IntoResponse, ApiError> {
    blocking(move || s.app.delete_unit(uid, &unit_id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn generate(
    State(s): State<Shared>,
    Caller(uid): Caller,
    UrlPath(unit_id): UrlPath<String>,
) -> Result<impl IntoResponse, ApiError> {
    let job: Job = blocking(move || {
        s.app.get_unit(uid, &unit_id)?;
        s.jobs.submit(uid, &unit_id).map_err(ApiError::from)
    })
    .await?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": job.job_id, "state": job.state }))))
}

async fn get_job(
    State(s): State<Shared>,
    Caller(uid): Caller,
    UrlPath(job_id): UrlPath<String>,
) -> Result<impl IntoResponse, ApiError> {
    s.jobs.get(uid, &job_id).map(Json).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "job not found"))
}

/// Contents of a generated device directory.
#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DeviceListing {
    pub unit_id: String,
    pub root: String,
    /// Team ids with a blog tree.
    pub blogs: Vec<String>,
    pub esuitcase: Vec<String>,
    pub toolbox: Option<String>,
    /// Every file, relative to the root, sorted.
    pub files: Vec<String>,
}

fn device_root(s: &Service, uid: Uid, unit_id: &str) -> Result<PathBuf, ApiError> {
    let not_found = || ApiError::new(StatusCode::NOT_FOUND, "no device for this unit");
    if unit_id.is_empty() || unit_id.starts_with('.') || unit_id.contains(['/', '\\']) {
        return Err(not_found());
    }
    let dir = s.app.store.device_dir(uid, unit_id);
    if dir.is_dir() {
        Ok(dir)
    } else {
        Err(not_found())
    }
}

async fn device_listing(
    State(s): State<Shared>,
    Caller(uid): Caller,
    UrlPath(unit_id): UrlPath<String>,
) -> Result<Json<DeviceListing>, ApiError> {
    blocking(move || {
        let dir = device_root(&s, uid, &unit_id)?;
        let mut files = Vec::new();
        for entry in walkdir::WalkDir::new(&dir).sort_by_file_name() {
            let entry = entry.map_err(ApiError::internal)?;
            if entry.file_type().is_file() {
                let rel = entry.path().strip_prefix(&dir).expect("walk stays under the root");
                files.push(rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"));
            }
        }
        files.sort();
        let mut blogs: Vec<String> = files
            .iter()
            .filter_map(|f| f.strip_prefix("blogs/")?.split_once('/').map(|(team, _)| team.to_string()))
            .collect();
        blogs.dedup();
        let esuitcase = files.iter().filter(|f| f.starts_with("esuitcase/")).cloned().collect();
        let toolbox = files.iter().find(|f| *f == TOOLBOX_FILE).cloned();
        Ok::<_, ApiError>(Json(DeviceListing {
            root: device_locator(&unit_id),
            unit_id,
            blogs,
            esuitcase,
            toolbox,
            files,
        }))
    })
    .await
}

/// `rel` as a path below the root, or `None` if it could escape it.
fn sanitize(rel: &str) -> Option<PathBuf> {
    let path = Path::new(rel);
    let mut out = PathBuf::new();
    for c in path.components() {
        match c {
            Component::Normal(part) if !part.to_string_lossy().starts_with('.') => out.push(part),
            _ => return None,
        }
    }
    (!out.as_os_str().is_empty()).then_some(out)
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        _ => "text/plain; charset=utf-8",
    }
}

async fn device_file(
    State(s): State<Shared>,
    Caller(uid): Caller,
    UrlPath((unit_id, rel)): UrlPath<(String, String)>,
) -> Result<Response, ApiError> {
    blocking(move || {
        let not_found = || ApiError::new(StatusCode::NOT_FOUND, "no such device file");
        let root = device_root(&s, uid, &unit_id)?;
        let path = root.join(sanitize(&rel).ok_or_else(not_found)?);
        if !path.is_file() {
            return Err(not_found());
        }
        let bytes = std::fs::read(&path).map_err(ApiError::internal)?;
        let mut response = bytes.into_response();
        response.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type(&path)));
        Ok(response)
    })
    .await
}
