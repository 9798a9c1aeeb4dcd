//! Command-line layer over `tierplace-core`: JSON config, scenario runs,
//! solver cross-checks and the CSV/text report bundle.

pub mod bundle;
pub mod commands;
pub mod config;

pub use bundle::Archive;
pub use config::Config;
