//! Batch runner: TOML configuration, seeded runs, artifacts and the run
//! registry.
//!
//! A run writes into `<out>/<kind>-<hash8>-s<seed>/`: the resolved
//! `config.toml`, CSV and JSON artifacts, and `record.json`. Every CSV starts
//! with `#` lines carrying `schema_version`, `config_hash` and `seed`; every
//! JSON artifact wraps its payload with the same three fields.

mod config;
mod run;

pub use config::*;
pub use run::*;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "KPPLAB_OUT";
