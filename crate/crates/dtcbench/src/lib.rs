//! Scenario configuration files, CSV emission, and report rendering for the
//! `dtcbench` command-line tool.

pub mod commands;
pub mod config;
pub mod csv;
pub mod report;
