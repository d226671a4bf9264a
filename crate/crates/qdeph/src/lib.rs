//! File formats, parallel drivers and the `qdeph` command line on top of
//! [`qdeph_core`].

pub mod cli;
pub mod io;
pub mod parallel;

pub use qdeph_core;
