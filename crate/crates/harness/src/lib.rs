//! Experiment harness: scenario presets and config files, the Monte-Carlo
//! experiment runner, on-disk result archives, plot emission and the
//! `searchtrack` CLI surface.

pub mod archive;
pub mod config;
pub mod plot;
pub mod runner;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    /// A config file failed schema or semantic validation.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] searchtrack_core::Error),

    #[error("archive at {path} is missing {what}")]
    MissingSeries { path: String, what: String },

    #[error("unknown mode `{0}` (expected v1, v2 or vmo)")]
    UnknownMode(String),

    #[error("unknown scenario preset `{0}` (expected scenario1..scenario4)")]
    UnknownPreset(String),
}

pub type Result<T> = std::result::Result<T, Error>;
