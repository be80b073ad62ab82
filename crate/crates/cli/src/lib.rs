//! File formats, the parallel batch runner, rendering and the `harper`
//! command line on top of `harper-core`.

pub mod batch;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod formats;
pub mod render;
pub mod selftest;
