//! Output tables for the conic-census command-line tool, split out so the
//! integration tests can re-parse what the binary emits.

pub mod output;
