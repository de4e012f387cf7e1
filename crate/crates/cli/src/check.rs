//! Monte Carlo against closed-form observables.

use pmqkd::sifting::sift_acceptance;
use pmqkd::{analytic_observables, run_batch, ProtocolParams, TallySummary};

/// Comparison of one simulated quantity against its closed-form value.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub distance_km: f64,
    pub quantity: &'static str,
    pub simulated: f64,
    pub expected: f64,
    pub std: f64,
}

impl CheckLine {
    /// Number of standard errors between simulation and expectation.
    pub fn sigmas(&self) -> f64 {
        if self.std > 0.0 {
            (self.simulated - self.expected).abs() / self.std
        } else if self.simulated == self.expected {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn passes(&self, max_sigma: f64) -> bool {
        self.sigmas() <= max_sigma
    }
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "L={:>5} km {:<6} mc={:.6e} analytic={:.6e} std={:.2e} ({:.2}σ)",
            self.distance_km,
            self.quantity,
            self.simulated,
            self.expected,
            self.std,
            self.sigmas()
        )
    }
}

/// Simulates each distance and pairs the sifted gain and symbol error rate
/// with their closed-form values.
pub fn mc_check(
    params: &ProtocolParams,
    distances: &[f64],
    rounds: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<(TallySummary, [CheckLine; 2])>, pmqkd::Error> {
    distances
        .iter()
        .map(|&d| {
            let p = params.with_distance(d);
            let summary = run_batch(&p, rounds, seed, workers)?;
            let obs = analytic_observables(&p)?;
            let gain = obs.q * sift_acceptance(p.slices, p.n);
            Ok((
                summary,
                [
                    CheckLine {
                        distance_km: d,
                        quantity: "Q",
                        simulated: summary.q_hat,
                        expected: gain,
                        std: summary.std_q,
                    },
                    CheckLine {
                        distance_km: d,
                        quantity: "E^Z",
                        simulated: summary.ez_hat,
                        expected: obs.ez,
                        std: summary.std_ez,
                    },
                ],
            ))
        })
        .collect()
}
