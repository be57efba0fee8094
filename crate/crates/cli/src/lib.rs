//! Command-line front end: configuration, dispatch and CSV reports.

// `!(x > 0.0)` is used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod commands;
pub mod config;
pub mod csv;

pub use app::run_args;
