//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod naive;
pub mod random_rules;
