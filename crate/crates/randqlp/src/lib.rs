//! Command-line harness and file formats around `randqlp-core`.
//!
//! * `io::binary`: raw column-major matrix files with an `RQLP` header.
//! * `io::mtx`: Matrix Market reader (densifying, with a memory cap).
//! * `io::tables`: CSV outputs with fixed headers.
//! * `bench`: median-of-R wall-clock timing.
//! * `cli`: the `randqlp` binary's subcommands.

pub mod algs;
pub mod bench;
pub mod cli;
pub mod error;
pub mod io;

pub use error::{Error, Result};
