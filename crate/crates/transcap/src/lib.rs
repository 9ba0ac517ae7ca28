//! File formats, experiment orchestration and the `transcap` command line
//! on top of `transcap-core`.

pub mod cli;
pub mod experiment;
pub mod format;

pub use transcap_core as core;
