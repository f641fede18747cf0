//! Batch front end for metspace: command definitions, report output and the
//! verification suites behind `metspace verify`.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;
