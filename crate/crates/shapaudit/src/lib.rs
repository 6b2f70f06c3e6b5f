//! Files, configuration and the command line around `shapaudit-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod hexfloat;
pub mod io;
pub mod model_json;
pub mod plots;
pub mod report;
pub mod selftest;

pub use error::{AppError, AppResult};
