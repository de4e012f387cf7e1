//! Library side of the `pmqkd` command: configuration files, distance
//! sweeps, correspondence tables and the Monte Carlo consistency check.

pub mod check;
pub mod config;
pub mod output;
pub mod sweep;
pub mod table;

use thiserror::Error;

pub use config::{parse_config, ConfigError};
pub use sweep::{run_sweep, Mode, SweepRow, SweepSpec};
pub use table::render_table;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] pmqkd::Error),
    #[error("at L = {distance} km: {source}")]
    AtDistance {
        distance: f64,
        #[source]
        source: pmqkd::Error,
    },
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
