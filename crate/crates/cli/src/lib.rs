//! Command-line front end for `nominal-core`: a text format for orbit-wise
//! automata and a runner that learns the built-in targets and reports stats.

pub mod format;
pub mod runner;
