//! File formats, reports and the command-line front end for `dynframe-core`.

pub mod cli;
pub mod error;
pub mod problem_file;
pub mod report;
pub mod sdpa;

pub use error::{AppError, AppResult};
