//! Configuration, snapshots, CSV output and run orchestration.

pub mod config;
pub mod csv;
pub mod run;
pub mod snapshot;
pub mod units;
