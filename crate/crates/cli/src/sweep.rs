//! Distance sweeps producing one CSV row per distance.

use std::fmt::Write;

use pmqkd::montecarlo::{estimate_ex, run_batch};
use pmqkd::rates::{channel_transmittance, rate_report, IntensityChoice};
use pmqkd::sifting::sift_acceptance;
use pmqkd::{
    optimize_intensity, plob_bound, rate_pm, IntensityGrid, Observables, ProtocolParams,
    RateReport, TallySummary,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Columns written for every mode.
pub const RATE_COLUMNS: [&str; 9] = [
    "L_km",
    "mu",
    "Q",
    "Ez",
    "Ex",
    "rate_trits",
    "rate_bits",
    "rate_2pm_bits",
    "plob_bits",
];

/// Extra columns in Monte Carlo modes.
pub const MC_COLUMNS: [&str; 4] = ["q_hat", "ez_hat", "std_q", "std_ez"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Closed-form observables.
    Analytic,
    /// Observables estimated by simulation.
    Montecarlo,
    /// Analytic rates with simulated estimates alongside.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub l_start: f64,
    pub l_end: f64,
    pub l_step: f64,
    pub mode: Mode,
    /// Rounds per distance in Monte Carlo modes.
    pub rounds: u64,
    pub seed: u64,
    pub optimize_mu: bool,
    pub fixed_mu: Option<f64>,
    pub grid: IntensityGrid,
    /// Worker threads; output does not depend on it.
    pub workers: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            l_start: 0.0,
            l_end: 500.0,
            l_step: 10.0,
            mode: Mode::Analytic,
            rounds: 1_000_000,
            seed: 1,
            optimize_mu: true,
            fixed_mu: None,
            grid: IntensityGrid::default(),
            workers: 1,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Sweep(m.to_string()));
        if !(self.l_start.is_finite() && self.l_end.is_finite() && self.l_start >= 0.0) {
            return bad("distances must be finite and nonnegative");
        }
        if self.l_start > self.l_end {
            return bad("L_start must not exceed L_end");
        }
        if !(self.l_step > 0.0 && self.l_step.is_finite()) {
            return bad("L_step must be positive");
        }
        if self.mode != Mode::Analytic && self.rounds == 0 {
            return bad("rounds must be at least 1 in Monte Carlo modes");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if !self.optimize_mu && self.fixed_mu.is_none() {
            return bad("either optimize the intensity or give a fixed one");
        }
        if let Some(mu) = self.fixed_mu {
            if !(mu >= 0.0 && mu.is_finite()) {
                return bad("fixed intensity must be nonnegative");
            }
        }
        Ok(())
    }

    pub fn distances(&self) -> Vec<f64> {
        let count = ((self.l_end - self.l_start) / self.l_step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.l_start + i as f64 * self.l_step)
            .collect()
    }

    fn intensity(&self) -> IntensityChoice {
        match (self.optimize_mu, self.fixed_mu) {
            (false, Some(mu)) => IntensityChoice::Fixed(mu),
            _ => IntensityChoice::Optimize(self.grid.clone()),
        }
    }

    /// Seed for the `index`-th distance of a sweep.
    fn distance_seed(&self, index: usize) -> u64 {
        self.seed
            .wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// One sweep row: the rate report, plus simulation estimates in Monte Carlo
/// modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub report: RateReport,
    pub mc: Option<TallySummary>,
}

fn plob_bits(params: &ProtocolParams) -> Result<f64, pmqkd::Error> {
    let eta = channel_transmittance(params);
    if eta >= 1.0 {
        Ok(f64::INFINITY)
    } else {
        plob_bound(eta)
    }
}

/// Rate at one distance with observables taken from a simulated batch.
fn simulated_rate(
    params: &ProtocolParams,
    spec: &SweepSpec,
    seed: u64,
) -> Result<(f64, Observables, f64, TallySummary), pmqkd::Error> {
    let mu = match spec.intensity() {
        IntensityChoice::Fixed(mu) => mu,
        IntensityChoice::Optimize(grid) => optimize_intensity(params, &grid)?.0,
    };
    let p = params.with_mu(mu);
    let summary = run_batch(&p, spec.rounds, seed, spec.workers)?;
    let obs = observables_from_summary(&summary, &p)?;
    Ok((mu, obs, rate_pm(p.n, p.slices, &obs, p.f), summary))
}

/// Turns batch estimates into the observables of the key-rate formula. The
/// gain is divided by the slice acceptance so it matches
/// [`Observables::q`].
pub fn observables_from_summary(
    summary: &TallySummary,
    params: &ProtocolParams,
) -> Result<Observables, pmqkd::Error> {
    Ok(Observables {
        q: summary.q_hat / sift_acceptance(params.slices, params.n),
        ez: summary.ez_hat,
        ex: estimate_ex(summary, params, params.phase_error)?,
    })
}

fn evaluate(
    params: &ProtocolParams,
    spec: &SweepSpec,
    index: usize,
    distance: f64,
) -> Result<SweepRow, pmqkd::Error> {
    let params = params.with_distance(distance);
    let seed = spec.distance_seed(index);
    match spec.mode {
        Mode::Analytic => Ok(SweepRow {
            report: rate_report(&params, &spec.intensity())?,
            mc: None,
        }),
        Mode::Both => {
            let report = rate_report(&params, &spec.intensity())?;
            let p = params.with_mu(report.mu_used);
            let summary = run_batch(&p, spec.rounds, seed, spec.workers)?;
            Ok(SweepRow {
                report,
                mc: Some(summary),
            })
        }
        Mode::Montecarlo => {
            let (mu_used, observables, rate_trits, summary) = simulated_rate(&params, spec, seed)?;
            let binary = params.with_phases(2);
            let (_, _, rate_2pm_bits, _) = simulated_rate(&binary, spec, seed)?;
            Ok(SweepRow {
                report: RateReport {
                    distance_km: distance,
                    mu_used,
                    rate_trits,
                    rate_bits: rate_trits * (params.n as f64).log2(),
                    rate_2pm_bits,
                    plob_bits: plob_bits(&params)?,
                    observables,
                },
                mc: Some(summary),
            })
        }
    }
}

/// Evaluates every distance of `spec`. Rows come back in distance order.
pub fn run_sweep(params: &ProtocolParams, spec: &SweepSpec) -> Result<Vec<SweepRow>, CliError> {
    spec.validate()?;
    params.validate()?;
    let distances = spec.distances();
    let eval = |(i, &d): (usize, &f64)| {
        evaluate(params, spec, i, d).map_err(|source| CliError::AtDistance {
            distance: d,
            source,
        })
    };
    match spec.mode {
        // simulation batches already spread over the workers
        Mode::Montecarlo | Mode::Both => distances.iter().enumerate().map(eval).collect(),
        Mode::Analytic => distances.par_iter().enumerate().map(eval).collect(),
    }
}

/// Formats a value with 12 significant digits.
pub fn format_value(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn csv_header(mode: Mode) -> String {
    let mut cols: Vec<&str> = RATE_COLUMNS.to_vec();
    if mode != Mode::Analytic {
        cols.extend(MC_COLUMNS);
    }
    cols.join(",")
}

pub fn render_csv(rows: &[SweepRow], mode: Mode) -> String {
    let mut out = csv_header(mode);
    out.push('\n');
    for row in rows {
        let r = &row.report;
        let mut values = vec![
            r.distance_km,
            r.mu_used,
            r.observables.q,
            r.observables.ez,
            r.observables.ex,
            r.rate_trits,
            r.rate_bits,
            r.rate_2pm_bits,
            r.plob_bits,
        ];
        if let Some(mc) = &row.mc {
            values.extend([mc.q_hat, mc.ez_hat, mc.std_q, mc.std_ez]);
        }
        let cells: Vec<String> = values.into_iter().map(format_value).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}
