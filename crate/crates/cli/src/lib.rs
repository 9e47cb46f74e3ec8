//! Library surface of the workbench CLI: workspace loading and report
//! formatting, shared between the binary and its tests.

pub mod format;
pub mod workspace;
