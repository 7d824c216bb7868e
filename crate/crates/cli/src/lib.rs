//! Library surface of the command-line tool, exposed so integration tests
//! can drive the stages directly.

pub mod config;
pub mod ingest;
pub mod report;
pub mod stages;
