//! File formats, parallel drivers and the command-line front end for
//! `callrate-core`.

pub mod cli;
pub mod csv_io;
pub mod parallel;
pub mod report;
