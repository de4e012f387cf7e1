//! Simulation against independent closed forms.

use std::f64::consts::{PI, TAU};

use pmqkd::montecarlo::simulate_fixed_round;
use pmqkd::photonics::arm_transmittance;
use pmqkd::rates::{rate_report, IntensityChoice};
use pmqkd::sifting::{ideal_detector, sift_acceptance, PhaseSample, Trit};
use pmqkd::{
    analytic_observables, run_batch, InterferenceModel, IntensityGrid, ProtocolParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Single-click probabilities (right port, some wrong port) for a symmetric
/// tritter at an exact lattice phase, threshold detectors, no dark counts.
fn tritter_lattice_clicks(i: f64) -> (f64, f64) {
    let matched = 1.0 - (-4.0 * i / 3.0).exp();
    let unmatched = 1.0 - (-i / 3.0).exp();
    let right = matched * (1.0 - unmatched).powi(2);
    let wrong = 2.0 * unmatched * (1.0 - matched) * (1.0 - unmatched);
    (right, wrong)
}

#[test]
fn wrong_port_clicks_explain_every_error() {
    let params = ProtocolParams {
        p_d: 0.0,
        e_d: 0.0,
        interference: InterferenceModel::Multiport,
        ..ProtocolParams::exact_lattice().with_mu(2.0)
    };
    let (right, wrong) = tritter_lattice_clicks(2.0 * arm_transmittance(&params));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let rounds = 400_000;
    let (mut sifted, mut errors) = (0u64, 0u64);
    for _ in 0..rounds {
        let ka = Trit::new(rng.random_range(0..3), 3).unwrap();
        let kb = Trit::new(rng.random_range(0..3), 3).unwrap();
        let s = rng.random_range(0..3) as f64;
        // mid-slice phases so the slices differ by exactly 5s
        let base = (rng.random_range(0..15) as f64 + 0.5) * TAU / 15.0;
        let phi_b = PhaseSample::new(base, 15);
        let phi_a = PhaseSample::new(base + s * TAU / 3.0, 15);
        let r = simulate_fixed_round(&params, ka, kb, phi_a, phi_b, &mut rng);
        assert_eq!(r.slice_residual, 0.0);
        let Some(sift) = r.sift else { continue };
        sifted += 1;
        let matched = ideal_detector(r.delta_phi, 3, 1e-9).unwrap();
        let is_error = sift.kappa_b_double_prime != ka;
        assert_eq!(is_error, sift.detector != matched);
        errors += is_error as u64;
    }
    let p_success = right + wrong;
    let q = sifted as f64 / rounds as f64;
    let sigma_q = (p_success * (1.0 - p_success) / rounds as f64).sqrt();
    assert!((q - p_success).abs() < 3.0 * sigma_q, "q {q} vs {p_success}");
    let e = errors as f64 / sifted as f64;
    let e_true = wrong / p_success;
    let sigma_e = (e_true * (1.0 - e_true) / sifted as f64).sqrt();
    assert!((e - e_true).abs() < 3.0 * sigma_e, "e {e} vs {e_true}");
}

fn assert_batch_matches_analytic(params: &ProtocolParams, rounds: u64, seed: u64) {
    let summary = run_batch(params, rounds, seed, 1).unwrap();
    let obs = analytic_observables(params).unwrap();
    let gain = obs.q * sift_acceptance(params.slices, params.n);
    assert!(
        (summary.q_hat - gain).abs() <= 3.0 * summary.std_q,
        "gain {} vs {gain} (std {})",
        summary.q_hat,
        summary.std_q
    );
    assert!(
        (summary.ez_hat - obs.ez).abs() <= 3.0 * summary.std_ez,
        "E^Z {} vs {} (std {})",
        summary.ez_hat,
        obs.ez,
        summary.std_ez
    );
}

#[test]
fn batch_agrees_with_closed_form_for_both_models() {
    let base = ProtocolParams::default()
        .with_mu(0.8)
        .with_distance(20.0);
    for model in [InterferenceModel::IdealDiscriminator, InterferenceModel::Multiport] {
        let params = ProtocolParams {
            interference: model,
            ..base.clone()
        };
        assert_batch_matches_analytic(&params, 1_000_000, 17);
    }
    assert_batch_matches_analytic(&base.with_phases(2), 1_000_000, 18);
    // unequal intensities and noisy detectors
    let skewed = ProtocolParams {
        mu_a: 1.5,
        mu_b: 0.3,
        p_d: 1e-3,
        e_d: 0.05,
        ..base
    };
    assert_batch_matches_analytic(&skewed, 1_000_000, 19);
}

#[test]
fn lattice_phase_error_from_slicing_alone() {
    // no loss, no noise: errors come only from the in-slice phase spread
    let params = ProtocolParams {
        p_d: 0.0,
        e_d: 0.0,
        eta_d: 1.0,
        ..ProtocolParams::default().with_mu(0.5)
    };
    let obs = analytic_observables(&params).unwrap();
    assert!(obs.ez > 0.0 && obs.ez < 0.1, "{}", obs.ez);
    let finer = ProtocolParams {
        slices: 160,
        ..params.clone()
    };
    assert!(analytic_observables(&finer).unwrap().ez < obs.ez / 50.0);
    assert_batch_matches_analytic(&params, 500_000, 5);
}

#[test]
fn optimal_intensity_never_grows_with_distance() {
    let params = ProtocolParams::default();
    let grid = IntensityChoice::Optimize(IntensityGrid::default());
    let mut last = f64::INFINITY;
    for l in (0..=400).step_by(20) {
        let report = rate_report(&params.with_distance(l as f64), &grid).unwrap();
        assert!(report.mu_used <= last, "mu grew at {l} km");
        last = report.mu_used;
    }
}

#[test]
fn optimum_beats_every_grid_point() {
    let params = ProtocolParams::default();
    let grid = IntensityGrid::default();
    let (_, best) = pmqkd::optimize_intensity(&params, &grid).unwrap();
    for mu in grid.values() {
        let p = params.with_mu(mu);
        let rate = pmqkd::rate_pm(p.n, p.slices, &analytic_observables(&p).unwrap(), p.f);
        assert!(best >= rate);
    }
}

#[test]
fn slice_penalty_integral_by_quadrature() {
    // midpoint rule for 1 − (M/2π)∫cos δ dδ over one slice
    let m = 16.0;
    let half = PI / m;
    let steps = 200_000;
    let h = 2.0 * half / steps as f64;
    let integral: f64 = (0..steps)
        .map(|k| (-half + (k as f64 + 0.5) * h).cos() * h)
        .sum();
    let penalty = 1.0 - integral / (2.0 * half);
    assert!((pmqkd::montecarlo::slice_penalty(16) - penalty).abs() < 1e-10);
}
