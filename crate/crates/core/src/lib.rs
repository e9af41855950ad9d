//! Core of the teacher assistance tool: teacher profiles, the fact store, the
//! adaptation rule engine, scenario composition and device generation.

mod macros;

pub mod assets;
pub mod device;
pub mod facts;
pub mod ils;
pub mod profile;
pub mod rules;
pub mod scenario;
pub mod store;

/// A name that does not belong to the expected enumeration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} {value:?}")]
pub struct UnknownName {
    pub kind: &'static str,
    pub value: String,
}
