//! Std companion of `theta-summa-core`: text and JSON formats, seeded
//! samplers, the randomized verification suites and their reports.

pub mod format;
pub mod report;
pub mod sampling;
pub mod suites;
