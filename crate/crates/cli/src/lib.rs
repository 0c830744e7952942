//! Command-line front end: experiment configuration, trace files,
//! aggregation and the acceptance checks.

pub mod aggregate;
pub mod cache;
pub mod commands;
pub mod config;
pub mod criteria;
pub mod error;
pub mod trace;
