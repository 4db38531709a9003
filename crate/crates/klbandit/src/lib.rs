//! File formats, parallel Monte Carlo experiments, run manifests and the
//! `klbandit` command line, built on [`klbandit_core`].

pub mod cli;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod manifest;

pub use error::{AppError, AppResult};
