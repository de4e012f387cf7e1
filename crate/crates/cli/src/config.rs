//! Line-based `key=value` configuration files.
//!
//! ```text
//! # comments and blank lines are ignored
//! p_d = 8e-8
//! M = 16
//! interference = ideal-discriminator
//! ex_model = slice-penalty
//! ```
//!
//! Omitted keys keep their defaults (see [`ProtocolParams::default`]).

use pmqkd::{InterferenceModel, PhaseErrorModel, ProtocolParams};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Range(String),
}

/// Keys accepted by [`parse_config`].
pub const KEYS: &[&str] = &[
    "n",
    "mu",
    "mu_a",
    "mu_b",
    "p_d",
    "eta_d",
    "f",
    "M",
    "e_d",
    "alpha",
    "L",
    "interference",
    "ex_model",
];

pub fn parse_config(text: &str) -> Result<ProtocolParams, ConfigError> {
    let mut params = ProtocolParams::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError::Parse { line, message };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, found `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let real = || {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("`{value}` is not a number for {key}")))
        };
        let count = || {
            value
                .parse::<usize>()
                .map_err(|_| err(format!("`{value}` is not a nonnegative integer for {key}")))
        };
        match key {
            "n" => params.n = count()?,
            "M" => params.slices = count()?,
            "mu" => {
                let mu = real()?;
                params.mu_a = mu;
                params.mu_b = mu;
            }
            "mu_a" => params.mu_a = real()?,
            "mu_b" => params.mu_b = real()?,
            "p_d" => params.p_d = real()?,
            "eta_d" => params.eta_d = real()?,
            "f" => params.f = real()?,
            "e_d" => params.e_d = real()?,
            "alpha" => params.alpha = real()?,
            "L" => params.distance_km = real()?,
            "interference" => params.interference = value.parse::<InterferenceModel>().map_err(err)?,
            "ex_model" => {
                params.phase_error = value
                    .parse::<PhaseErrorModel>()
                    .map_err(|e| err(e.to_string()))?
            }
            other => {
                return Err(err(format!(
                    "unknown key `{other}` (known keys: {})",
                    KEYS.join(", ")
                )))
            }
        }
    }
    params.validate().map_err(|e| match e {
        pmqkd::Error::Range(msg) => ConfigError::Range(msg),
        other => ConfigError::Range(other.to_string()),
    })?;
    Ok(params)
}
