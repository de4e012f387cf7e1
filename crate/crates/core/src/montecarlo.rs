//! Round-by-round protocol simulation over the optical model.
//!
//! Each round draws key symbols and random phases, interferes the two pulses,
//! samples the detectors and keeps rounds with exactly one click. Slice
//! comparison and the two flips run on the recorded round afterwards, the
//! way the parties would sift in post-processing.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProtocolParams;
use crate::photonics::{
    apply_misalignment, arm_transmittance, click_probabilities, sample_clicks, ClickPattern,
    InterferenceModel,
};
use crate::sifting::{
    phase_delta, reconcile, slice_match, total_phase, DetectorId, PhaseSample, SiftOutcome, Trit,
};

/// Rounds simulated from one random substream. Fixed so that results do not
/// depend on how many workers share the batch.
pub const BLOCK_ROUNDS: u64 = 1 << 16;

/// Everything observed in one protocol round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub kappa_a: Trit,
    pub kappa_b: Trit,
    pub phi_a: PhaseSample,
    pub phi_b: PhaseSample,
    /// Phase difference between the two prepared states.
    pub delta_phi: f64,
    pub clicks: ClickPattern,
    /// Exactly one detector clicked.
    pub success: bool,
    /// Reported detector after misalignment, for successful rounds.
    pub detector: Option<DetectorId>,
    /// Present when the round succeeded and the announced slices matched.
    pub sift: Option<SiftOutcome>,
    pub slice_residual: f64,
}

impl RoundRecord {
    /// Sifted and Bob's reconciled symbol disagrees with Alice's.
    pub fn is_error(&self) -> bool {
        self.sift
            .is_some_and(|s| s.kappa_b_double_prime != self.kappa_a)
    }
}

/// Per-round quantities that depend only on the parameters.
#[derive(Debug, Clone)]
struct RoundSimulator {
    n: usize,
    slices: usize,
    i_a: f64,
    i_b: f64,
    p_d: f64,
    e_d: f64,
    model: InterferenceModel,
}

impl RoundSimulator {
    fn new(params: &ProtocolParams) -> Self {
        let eta = arm_transmittance(params);
        RoundSimulator {
            n: params.n,
            slices: params.slices,
            i_a: params.mu_a * eta,
            i_b: params.mu_b * eta,
            p_d: params.p_d,
            e_d: params.e_d,
            model: params.interference,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> RoundRecord {
        let n = self.n;
        let kappa_a = Trit::wrapping(rng.random_range(0..n) as i64, n);
        let kappa_b = Trit::wrapping(rng.random_range(0..n) as i64, n);
        let phi_a = PhaseSample::new(rng.random::<f64>() * TAU, self.slices);
        let phi_b = PhaseSample::new(rng.random::<f64>() * TAU, self.slices);
        self.play(kappa_a, kappa_b, phi_a, phi_b, rng)
    }

    fn play<R: Rng + ?Sized>(
        &self,
        kappa_a: Trit,
        kappa_b: Trit,
        phi_a: PhaseSample,
        phi_b: PhaseSample,
        rng: &mut R,
    ) -> RoundRecord {
        let n = self.n;
        let delta_phi = phase_delta(total_phase(kappa_a, phi_a, n), total_phase(kappa_b, phi_b, n));
        let ports = self.model.port_intensities(self.i_a, self.i_b, delta_phi, n);
        let clicks = sample_clicks(&click_probabilities(&ports, self.p_d), rng);
        let detector = clicks
            .single()
            .map(|d| apply_misalignment(d, self.e_d, n, rng));
        let slices = slice_match(phi_a.slice(), phi_b.slice(), self.slices, n);
        let sift = match detector {
            Some(d) if slices.accepted => Some(reconcile(kappa_b, d, slices.offset, n)),
            _ => None,
        };
        RoundRecord {
            kappa_a,
            kappa_b,
            phi_a,
            phi_b,
            delta_phi,
            clicks,
            success: detector.is_some(),
            detector,
            sift,
            slice_residual: slices.residual_slices,
        }
    }
}

/// Simulates one round with uniformly random key symbols and phases.
pub fn simulate_round<R: Rng + ?Sized>(params: &ProtocolParams, rng: &mut R) -> RoundRecord {
    RoundSimulator::new(params).draw(rng)
}

/// Simulates one round with the key symbols and random phases given.
pub fn simulate_fixed_round<R: Rng + ?Sized>(
    params: &ProtocolParams,
    kappa_a: Trit,
    kappa_b: Trit,
    phi_a: PhaseSample,
    phi_b: PhaseSample,
    rng: &mut R,
) -> RoundRecord {
    RoundSimulator::new(params).play(kappa_a, kappa_b, phi_a, phi_b, rng)
}

/// Raw counts; merging is integer addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub rounds: u64,
    pub sifted: u64,
    pub errors: u64,
}

impl Tally {
    pub fn record(&mut self, round: &RoundRecord) {
        self.rounds += 1;
        if round.sift.is_some() {
            self.sifted += 1;
            self.errors += round.is_error() as u64;
        }
    }

    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            rounds: self.rounds + other.rounds,
            sifted: self.sifted + other.sifted,
            errors: self.errors + other.errors,
        }
    }
}

/// Gain and error-rate estimates from a batch of rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TallySummary {
    pub rounds_total: u64,
    pub rounds_sifted: u64,
    /// Sifted rounds over all rounds.
    pub q_hat: f64,
    /// Fraction of sifted rounds whose reconciled symbol is wrong.
    pub ez_hat: f64,
    pub std_q: f64,
    pub std_ez: f64,
    pub seed: u64,
}

impl TallySummary {
    pub fn from_tally(tally: Tally, seed: u64) -> Self {
        let q_hat = if tally.rounds > 0 {
            tally.sifted as f64 / tally.rounds as f64
        } else {
            0.0
        };
        let ez_hat = if tally.sifted > 0 {
            tally.errors as f64 / tally.sifted as f64
        } else {
            0.0
        };
        let binomial = |p: f64, trials: u64| {
            if trials == 0 {
                0.0
            } else {
                (p * (1.0 - p) / trials as f64).sqrt()
            }
        };
        TallySummary {
            rounds_total: tally.rounds,
            rounds_sifted: tally.sifted,
            q_hat,
            ez_hat,
            std_q: binomial(q_hat, tally.rounds),
            std_ez: binomial(ez_hat, tally.sifted),
            seed,
        }
    }
}

fn run_block(sim: &RoundSimulator, master_seed: u64, block: u64, rounds: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(block);
    let mut tally = Tally::default();
    for _ in 0..rounds {
        tally.record(&sim.draw(&mut rng));
    }
    tally
}

/// Simulates `rounds` rounds on `streams` worker threads.
///
/// Rounds are cut into fixed blocks of [`BLOCK_ROUNDS`]; block `b` draws from
/// ChaCha stream `b` under `master_seed`. The summary is therefore identical
/// for any number of workers.
pub fn run_batch(
    params: &ProtocolParams,
    rounds: u64,
    master_seed: u64,
    streams: usize,
) -> Result<TallySummary> {
    params.validate()?;
    if rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be at least 1".into()));
    }
    if streams == 0 {
        return Err(Error::InvalidArgument("streams must be at least 1".into()));
    }
    let sim = RoundSimulator::new(params);
    let blocks = rounds.div_ceil(BLOCK_ROUNDS);
    let block_len = |b: u64| BLOCK_ROUNDS.min(rounds - b * BLOCK_ROUNDS);
    let tally = if streams == 1 {
        (0..blocks)
            .map(|b| run_block(&sim, master_seed, b, block_len(b)))
            .fold(Tally::default(), Tally::merge)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(streams)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
        pool.install(|| {
            (0..blocks)
                .into_par_iter()
                .map(|b| run_block(&sim, master_seed, b, block_len(b)))
                .reduce(Tally::default, Tally::merge)
        })
    };
    Ok(TallySummary::from_tally(tally, master_seed))
}

/// How the phase-error rate `E^X` is obtained from the measured `E^Z`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseErrorModel {
    /// `E^Z` plus the interference loss of a phase error uniform over one
    /// slice: `1 − sin(π/M)/(π/M)`.
    #[default]
    SlicePenalty,
    /// A fixed `E^X`.
    Constant(f64),
}

impl PhaseErrorModel {
    pub fn phase_error(self, ez: f64, slices: usize) -> Result<f64> {
        match self {
            PhaseErrorModel::SlicePenalty => Ok((ez + slice_penalty(slices)).min(1.0)),
            PhaseErrorModel::Constant(ex) if (0.0..=1.0).contains(&ex) => Ok(ex),
            PhaseErrorModel::Constant(ex) => Err(Error::Domain {
                what: "constant phase error",
                value: ex,
                domain: "[0, 1]",
            }),
        }
    }
}

impl fmt::Display for PhaseErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseErrorModel::SlicePenalty => f.write_str("slice-penalty"),
            PhaseErrorModel::Constant(ex) => write!(f, "constant:{ex}"),
        }
    }
}

impl FromStr for PhaseErrorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "slice-penalty" {
            return Ok(PhaseErrorModel::SlicePenalty);
        }
        if let Some(v) = s.strip_prefix("constant:") {
            return v
                .trim()
                .parse::<f64>()
                .map(PhaseErrorModel::Constant)
                .map_err(|_| Error::ModelUnavailable(s.to_string()));
        }
        Err(Error::ModelUnavailable(s.to_string()))
    }
}

/// Mean interference loss `1 − ⟨cos δ⟩` for `δ` uniform on `[−π/M, π/M]`.
pub fn slice_penalty(slices: usize) -> f64 {
    let half_width = PI / slices as f64;
    1.0 - half_width.sin() / half_width
}

/// Phase-error rate for a completed batch under `model`.
pub fn estimate_ex(
    summary: &TallySummary,
    params: &ProtocolParams,
    model: PhaseErrorModel,
) -> Result<f64> {
    model.phase_error(summary.ez_hat, params.slices)
}
