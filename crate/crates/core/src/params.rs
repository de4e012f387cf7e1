use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::PhaseErrorModel;
use crate::photonics::InterferenceModel;

/// Largest supported number of encoding phases (click patterns are bit masks).
pub const MAX_PHASES: usize = 32;

/// Physical and protocol constants for one simulated link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Number of encoding phases (3 for 3-PM-QKD, 2 for the binary protocol).
    pub n: usize,
    /// Alice's mean photon number per pulse.
    pub mu_a: f64,
    /// Bob's mean photon number per pulse.
    pub mu_b: f64,
    /// Dark-count probability per detector per gate.
    pub p_d: f64,
    /// Detector efficiency.
    pub eta_d: f64,
    /// Error-correction efficiency (≥ 1).
    pub f: f64,
    /// Number of random-phase slices.
    #[serde(rename = "M")]
    pub slices: usize,
    /// Misalignment error probability.
    pub e_d: f64,
    /// Fiber attenuation in dB/km.
    pub alpha: f64,
    /// Total Alice–Bob distance in km. Each arm is half of it.
    #[serde(rename = "L")]
    pub distance_km: f64,
    pub interference: InterferenceModel,
    pub phase_error: PhaseErrorModel,
}

impl Default for ProtocolParams {
    /// Dark counts, efficiencies, slice count and misalignment from the
    /// reference simulation setup; 0.2 dB/km fiber.
    fn default() -> Self {
        ProtocolParams {
            n: 3,
            mu_a: 0.05,
            mu_b: 0.05,
            p_d: 8e-8,
            eta_d: 0.145,
            f: 1.15,
            slices: 16,
            e_d: 0.015,
            alpha: 0.2,
            distance_km: 0.0,
            interference: InterferenceModel::default(),
            phase_error: PhaseErrorModel::default(),
        }
    }
}

impl ProtocolParams {
    /// Default parameters with `M = 15`, which puts every multiple of
    /// `2π/3` exactly on a slice boundary.
    pub fn exact_lattice() -> Self {
        ProtocolParams {
            slices: 15,
            ..Self::default()
        }
    }

    pub fn with_distance(&self, distance_km: f64) -> Self {
        ProtocolParams {
            distance_km,
            ..self.clone()
        }
    }

    /// Sets both parties' mean photon number.
    pub fn with_mu(&self, mu: f64) -> Self {
        ProtocolParams {
            mu_a: mu,
            mu_b: mu,
            ..self.clone()
        }
    }

    pub fn with_phases(&self, n: usize) -> Self {
        ProtocolParams { n, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        fn unit(name: &str, v: f64) -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Range(format!("{name} = {v} must lie in [0, 1]")))
            }
        }
        if self.n < 2 || self.n > MAX_PHASES {
            return Err(Error::Range(format!(
                "n = {} must satisfy 2 <= n <= {MAX_PHASES}",
                self.n
            )));
        }
        if self.slices < self.n {
            return Err(Error::Range(format!(
                "M = {} must be at least n = {}",
                self.slices, self.n
            )));
        }
        for (name, mu) in [("mu_a", self.mu_a), ("mu_b", self.mu_b)] {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(Error::Range(format!("{name} = {mu} must be >= 0")));
            }
        }
        unit("p_d", self.p_d)?;
        unit("eta_d", self.eta_d)?;
        unit("e_d", self.e_d)?;
        if !(self.f >= 1.0 && self.f.is_finite()) {
            return Err(Error::Range(format!("f = {} must be >= 1", self.f)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Range(format!("alpha = {} must be > 0", self.alpha)));
        }
        if !(self.distance_km >= 0.0 && self.distance_km.is_finite()) {
            return Err(Error::Range(format!(
                "L = {} must be >= 0",
                self.distance_km
            )));
        }
        if let PhaseErrorModel::Constant(ex) = self.phase_error {
            unit("constant phase error", ex)?;
        }
        Ok(())
    }
}
