//! Background generation jobs.
//!
//! One worker thread takes jobs in submission order. Every state change is
//! written to `<dir>/<job_id>.json` before it becomes visible, so a restart
//! can tell which jobs were cut short: those are marked failed on startup.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread::JoinHandle;
use std::time::{SystemTime, UNIX_EPOCH};

use at_core::profile::Uid;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::app::App;

/// Ordered as the states are passed through; `done` and `failed` are both final.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobState {
    pub fn is_final(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }

    /// Rank for monotonicity checks: the two final states share a rank.
    pub fn rank(self) -> u8 {
        match self {
            JobState::Queued => 0,
            JobState::Running => 1,
            JobState::Done | JobState::Failed => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub job_id: String,
    pub uid: Uid,
    pub unit_id: String,
    pub state: JobState,
    /// Where the device is served once the job is done.
    pub result: Option<String>,
    /// Stage-tagged failure message.
    pub error: Option<String>,
    /// Milliseconds since the Unix epoch.
    pub created_at: u64,
    pub updated_at: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Corrupt { path: PathBuf, source: serde_json::Error },
    #[error("job queue is shut down")]
    Closed,
}

pub const INTERRUPTED: &str = "interrupted: the service stopped before the job finished";

/// Called on the worker thread once a job is marked running, before the
/// pipeline starts.
pub type RunHook = Arc<dyn Fn(&Job) + Send + Sync>;

pub fn device_locator(unit_id: &str) -> String {
    format!("/api/device/{unit_id}/")
}

fn now_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

struct Table {
    dir: PathBuf,
    jobs: Mutex<HashMap<String, Job>>,
}

impl Table {
    fn persist(&self, job: &Job) -> Result<(), JobError> {
        let path = self.dir.join(format!("{}.json", job.job_id));
        let tmp = path.with_extension("json.tmp");
        let io = |source| JobError::Io { path: path.clone(), source };
        fs::write(&tmp, serde_json::to_vec_pretty(job).expect("job serializes")).map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)
    }

    /// Applies `change` to the job, persists it, then publishes it.
    fn update(&self, job_id: &str, change: impl FnOnce(&mut Job)) -> Result<Job, JobError> {
        let mut jobs = lock(&self.jobs);
        let mut job = jobs.get(job_id).cloned().ok_or(JobError::Closed)?;
        change(&mut job);
        job.updated_at = now_millis().max(job.updated_at);
        self.persist(&job)?;
        jobs.insert(job_id.to_string(), job.clone());
        Ok(job)
    }
}

fn load_dir(dir: &Path) -> Result<Vec<Job>, JobError> {
    let io = |source| JobError::Io { path: dir.to_path_buf(), source };
    fs::create_dir_all(dir).map_err(io)?;
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let bytes = fs::read(&path).map_err(|source| JobError::Io { path: path.clone(), source })?;
        let job = serde_json::from_slice(&bytes).map_err(|source| JobError::Corrupt { path: path.clone(), source })?;
        out.push(job);
    }
    Ok(out)
}

pub struct JobQueue {
    table: Arc<Table>,
    sender: Mutex<Option<mpsc::Sender<String>>>,
    worker: Mutex<Option<JoinHandle<()>>>,
}

impl std::fmt::Debug for JobQueue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JobQueue").field("dir", &self.table.dir).finish_non_exhaustive()
    }
}

impl JobQueue {
    /// Loads the jobs kept in `dir`, fails any that were left unfinished and
    /// starts the worker.
    pub fn start(app: Arc<App>, dir: impl Into<PathBuf>, hook: Option<RunHook>) -> Result<Self, JobError> {
        let dir = dir.into();
        let table = Arc::new(Table { jobs: Mutex::new(HashMap::new()), dir });
        for mut job in load_dir(&table.dir)? {
            if !job.state.is_final() {
                job.state = JobState::Failed;
                job.error = Some(INTERRUPTED.to_string());
                job.updated_at = now_millis().max(job.updated_at);
                table.persist(&job)?;
                tracing::warn!(job = %job.job_id, "marked interrupted job as failed");
            }
            lock(&table.jobs).insert(job.job_id.clone(), job);
        }

        let (tx, rx) = mpsc::channel::<String>();
        let worker_table = Arc::clone(&table);
        let worker = std::thread::Builder::new()
            .name("at-jobs".into())
            .spawn(move || {
                for job_id in rx {
                    if let Err(e) = run(&app, &worker_table, &job_id, hook.as_ref()) {
                        tracing::error!(job = %job_id, error = %e, "could not record job state");
                    }
                }
            })
            .map_err(|source| JobError::Io { path: table.dir.clone(), source })?;
        Ok(JobQueue { table, sender: Mutex::new(Some(tx)), worker: Mutex::new(Some(worker)) })
    }

    /// Records a queued job and hands it to the worker.
    pub fn submit(&self, uid: Uid, unit_id: &str) -> Result<Job, JobError> {
        let now = now_millis();
        let job = Job {
            job_id: hex::encode(rand::rng().random::<[u8; 16]>()),
            uid,
            unit_id: unit_id.to_string(),
            state: JobState::Queued,
            result: None,
            error: None,
            created_at: now,
            updated_at: now,
        };
        let sender = lock(&self.sender);
        let sender = sender.as_ref().ok_or(JobError::Closed)?;
        {
            let mut jobs = lock(&self.table.jobs);
            self.table.persist(&job)?;
            jobs.insert(job.job_id.clone(), job.clone());
        }
        sender.send(job.job_id.clone()).map_err(|_| JobError::Closed)?;
        Ok(job)
    }

    /// The job, if it exists and belongs to `uid`.
    pub fn get(&self, uid: Uid, job_id: &str) -> Option<Job> {
        lock(&self.table.jobs).get(job_id).filter(|j| j.uid == uid).cloned()
    }

    /// Stops accepting jobs and waits for the queued ones to finish.
    pub fn shutdown(&self) {
        lock(&self.sender).take();
        if let Some(worker) = lock(&self.worker).take() {
            let _ = worker.join();
        }
    }
}

impl Drop for JobQueue {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn run(app: &App, table: &Table, job_id: &str, hook: Option<&RunHook>) -> Result<(), JobError> {
    let job = table.update(job_id, |j| j.state = JobState::Running)?;
    if let Some(hook) = hook {
        hook(&job);
    }
    let outcome = app.generate(job.uid, &job.unit_id);
    let job = table.update(job_id, |j| match &outcome {
        Ok(_) => {
            j.state = JobState::Done;
            j.result = Some(device_locator(&j.unit_id));
        }
        Err(e) => {
            j.state = JobState::Failed;
            j.error = Some(e.to_string());
        }
    })?;
    tracing::info!(job = %job.job_id, state = ?job.state, "job finished");
    Ok(())
}
