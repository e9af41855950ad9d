//! Server side of the adaptation tool: authenticated JSON API, per-user
//! storage and background generation jobs, plus the operations the `at`
//! command line shares with it.

pub mod app;
pub mod config;
pub mod http;
pub mod jobs;

pub use app::{App, AppError, ProfileView, QuizSubmission};
pub use http::{router, Service};
