//! Key-rate engine: entropies, the phase-matching key-rate formula, the
//! repeaterless secret-key-capacity bound and closed-form observables.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProtocolParams;
use crate::photonics::{arm_transmittance, click_probabilities};
use crate::quadrature::gauss_legendre;
use crate::sifting::accepted_slice_offsets;

/// Gain and error rates entering the key-rate formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    /// Single-click probability per pulse pair, given matched phase slices.
    pub q: f64,
    pub ez: f64,
    pub ex: f64,
}

/// Key rates and comparison curves at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    #[serde(rename = "L_km")]
    pub distance_km: f64,
    pub mu_used: f64,
    /// Native units: symbols of size `n` per pulse.
    pub rate_trits: f64,
    pub rate_bits: f64,
    pub rate_2pm_bits: f64,
    pub plob_bits: f64,
    pub observables: Observables,
}

/// Two-point entropy `−x log_b x − (1−x) log_b(1−x)`.
pub fn entropy(x: f64, base: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            what: "entropy argument",
            value: x,
            domain: "[0, 1]",
        });
    }
    if base < 2 {
        return Err(Error::Domain {
            what: "entropy base",
            value: f64::from(base),
            domain: "integers >= 2",
        });
    }
    Ok(binary_entropy_bits(x) / f64::from(base).log2())
}

fn binary_entropy_bits(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

fn clamped_entropy(x: f64, base: u32) -> f64 {
    entropy(x.clamp(0.0, 1.0), base).unwrap_or(0.0)
}

/// `1 − H₂(E^Z) − H₂(E^X)`, floored at zero.
pub fn rate_shor_preskill(ez: f64, ex: f64) -> f64 {
    (1.0 - clamped_entropy(ez, 2) - clamped_entropy(ex, 2)).max(0.0)
}

/// `(n/M) · Q · max(0, 1 − f·H_n(E^Z) − H_n(E^X))`, in `n`-ary symbols per
/// pulse.
pub fn rate_pm(n: usize, slices: usize, obs: &Observables, f: f64) -> f64 {
    let base = n as u32;
    let bracket = 1.0 - f * clamped_entropy(obs.ez, base) - clamped_entropy(obs.ex, base);
    n as f64 / slices as f64 * obs.q * bracket.max(0.0)
}

/// Repeaterless secret-key capacity `−log₂(1 − η)` of a pure-loss channel.
pub fn plob_bound(eta_total: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta_total) {
        return Err(Error::Domain {
            what: "transmittance",
            value: eta_total,
            domain: "[0, 1)",
        });
    }
    Ok(-(-eta_total).ln_1p() / std::f64::consts::LN_2)
}

/// End-to-end fiber transmittance without detectors, `10^(−αL/10)`.
pub fn channel_transmittance(params: &ProtocolParams) -> f64 {
    10f64.powf(-params.alpha * params.distance_km / 10.0)
}

const RULE_ORDER: usize = 32;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(RULE_ORDER))
}

/// Success and error probability of one round whose pulses sit `delta` away
/// from the matched lattice phase. Port 0 is the matched port.
fn click_outcome(params: &ProtocolParams, i_a: f64, i_b: f64, delta: f64) -> (f64, f64) {
    let n = params.n;
    let ports = params.interference.port_intensities(i_a, i_b, delta, n);
    let p = click_probabilities(&ports, params.p_d);
    let single: Vec<f64> = (0..n)
        .map(|k| {
            p[k] * p
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, pj)| 1.0 - pj)
                .product::<f64>()
        })
        .collect();
    let success: f64 = single.iter().sum();
    let wrong = success - single[0];
    let reported_right = single[0] * (1.0 - params.e_d) + wrong * params.e_d / (n - 1) as f64;
    (success, success - reported_right)
}

/// Probability per round that a round is sifted, and that it is sifted with
/// a wrong symbol.
///
/// The random phases of both parties are uniform, so the slice difference is
/// uniform over `0..M` and the in-slice offsets differ by a triangular
/// variable on `(−1, 1)` slices. For an accepted slice difference with
/// residual `r`, the pulses miss the lattice by `(r + t)·2π/M`.
pub fn sifted_probabilities(params: &ProtocolParams) -> (f64, f64) {
    let eta = arm_transmittance(params);
    let (i_a, i_b) = (params.mu_a * eta, params.mu_b * eta);
    let slice_width = std::f64::consts::TAU / params.slices as f64;
    let mut gain = 0.0;
    let mut errors = 0.0;
    for (_, residual) in accepted_slice_offsets(params.slices, params.n) {
        for (x, w) in rule() {
            // t on (0, 1) with density 1 − t, mirrored onto (−1, 0)
            let t = 0.5 * (x + 1.0);
            let weight = 0.5 * w * (1.0 - t);
            for t in [t, -t] {
                let (s, e) = click_outcome(params, i_a, i_b, (residual + t) * slice_width);
                gain += weight * s;
                errors += weight * e;
            }
        }
    }
    let m = params.slices as f64;
    (gain / m, errors / m)
}

/// Closed-form `Q`, `E^Z` and `E^X` for the configured optical model.
pub fn analytic_observables(params: &ProtocolParams) -> Result<Observables> {
    params.validate()?;
    let (gain, errors) = sifted_probabilities(params);
    let accepted = accepted_slice_offsets(params.slices, params.n).len() as f64;
    let q = gain * params.slices as f64 / accepted;
    let ez = if gain > 0.0 { errors / gain } else { 0.0 };
    let ex = params.phase_error.phase_error(ez, params.slices)?;
    Ok(Observables { q, ez, ex })
}

/// Candidate mean photon numbers for [`optimize_intensity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IntensityGrid {
    /// `points` logarithmically spaced values from `lo` to `hi` inclusive.
    Log { lo: f64, hi: f64, points: usize },
    Values(Vec<f64>),
}

impl Default for IntensityGrid {
    fn default() -> Self {
        IntensityGrid::Log {
            lo: 1e-4,
            hi: 1.0,
            points: 40,
        }
    }
}

impl IntensityGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            IntensityGrid::Values(v) => v.clone(),
            IntensityGrid::Log { points: 0, .. } => Vec::new(),
            IntensityGrid::Log { lo, points: 1, .. } => vec![*lo],
            IntensityGrid::Log { lo, hi, points } => {
                let (a, b) = (lo.ln(), hi.ln());
                (0..*points)
                    .map(|i| (a + (b - a) * i as f64 / (*points - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

/// Best mean photon number (both parties equal) on the grid and its rate in
/// `n`-ary symbols per pulse. Ties go to the smaller intensity.
pub fn optimize_intensity(params: &ProtocolParams, grid: &IntensityGrid) -> Result<(f64, f64)> {
    let values = grid.values();
    if values.is_empty() {
        return Err(Error::InvalidArgument("intensity grid is empty".into()));
    }
    if let Some(&bad) = values.iter().find(|&&mu| !(mu > 0.0 && mu.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "intensity grid value {bad} is not positive"
        )));
    }
    let mut best: Option<(f64, f64)> = None;
    for mu in values {
        let p = params.with_mu(mu);
        let rate = rate_pm(p.n, p.slices, &analytic_observables(&p)?, p.f);
        best = match best {
            Some((m, r)) if r > rate || (r == rate && m <= mu) => Some((m, r)),
            _ => Some((mu, rate)),
        };
    }
    Ok(best.expect("grid is nonempty"))
}

/// Intensity policy for [`rate_report`].
#[derive(Debug, Clone, PartialEq)]
pub enum IntensityChoice {
    Optimize(IntensityGrid),
    Fixed(f64),
}

fn rate_at(params: &ProtocolParams, choice: &IntensityChoice) -> Result<(f64, Observables, f64)> {
    let mu = match choice {
        IntensityChoice::Optimize(grid) => optimize_intensity(params, grid)?.0,
        IntensityChoice::Fixed(mu) => *mu,
    };
    let p = params.with_mu(mu);
    let obs = analytic_observables(&p)?;
    Ok((mu, obs, rate_pm(p.n, p.slices, &obs, p.f)))
}

/// Analytic rates at `params.distance_km` for the configured protocol and for
/// the two-phase protocol under the same conditions, with the capacity bound.
pub fn rate_report(params: &ProtocolParams, choice: &IntensityChoice) -> Result<RateReport> {
    let (mu_used, observables, rate_trits) = rate_at(params, choice)?;
    let (_, _, rate_2pm_bits) = rate_at(&params.with_phases(2), choice)?;
    let eta = channel_transmittance(params);
    // the bound diverges only at zero loss
    let plob_bits = if eta >= 1.0 {
        f64::INFINITY
    } else {
        plob_bound(eta)?
    };
    Ok(RateReport {
        distance_km: params.distance_km,
        mu_used,
        rate_trits,
        rate_bits: rate_trits * (params.n as f64).log2(),
        rate_2pm_bits,
        plob_bits,
        observables,
    })
}
