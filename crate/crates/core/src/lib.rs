//! Simulation and key-rate analysis for phase-matching quantum key
//! distribution with `n` encoding phases (3-PM-QKD for `n = 3`).
//!
//! The crate is split along the layers of the protocol:
//!
//! * [`sifting`]: exact encoding, detector classification and the
//!   "flip and flip" reconciliation of Bob's key symbol, plus phase-slice
//!   post-compensation. No physics.
//! * [`photonics`]: fiber loss, interference of two coherent pulses at an
//!   `n`-output interferometer and threshold detectors with dark counts.
//! * [`montecarlo`]: round-by-round simulation of the protocol over the
//!   optical model, producing empirical gain and error-rate estimates.
//! * [`rates`]: entropy functions, key-rate formulas, the repeaterless
//!   secret-key-capacity bound and a closed-form observables model.

pub mod error;
pub mod montecarlo;
pub mod params;
pub mod photonics;
mod quadrature;
pub mod rates;
pub mod sifting;

pub use error::{Error, Result};
pub use montecarlo::{
    estimate_ex, run_batch, simulate_round, PhaseErrorModel, RoundRecord, TallySummary,
};
pub use params::ProtocolParams;
pub use photonics::{ClickPattern, InterferenceModel, PortIntensities};
pub use rates::{
    analytic_observables, entropy, optimize_intensity, plob_bound, rate_pm, rate_shor_preskill,
    IntensityGrid, Observables, RateReport,
};
pub use sifting::{DetectorId, PhaseOffsetClass, PhaseSample, SiftOutcome, Trit};
