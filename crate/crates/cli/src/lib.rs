//! Command-line front end and JSON workspace format for `tatetrace-core`.

pub mod commands;
pub mod workspace;
