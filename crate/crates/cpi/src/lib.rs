//! Std companion to `cpi-core`: CSV files, synthetic load profiles, the
//! benchmark harness, weight tuning and the `cpi` command line.

pub mod cli;
pub mod eval;
pub mod io;
pub mod synthetic;
pub mod tune;
