//! Artifact formats, run configuration and command implementations for the
//! `qmirror` command line.

pub mod commands;
pub mod config;
pub mod format;
pub mod report;
