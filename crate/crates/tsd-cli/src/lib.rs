//! File format and rendering for the `tsd` command-line tool, exposed as a
//! library so integration tests can drive the same code paths.

pub mod format;
pub mod svg;
