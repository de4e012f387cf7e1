//! Optical layer: fiber loss, two-pulse interference at an `n`-output
//! interferometer, and threshold detectors with dark counts.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::params::ProtocolParams;
use crate::sifting::DetectorId;

/// Mean photon number arriving at each output port in one gate.
pub type PortIntensities = SmallVec<[f64; 8]>;

/// How the middle node's interferometer distributes the two input pulses
/// over its `n` output ports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceModel {
    /// Symmetric `n`-port (discrete-Fourier coupler) with the two pulses in
    /// two of its inputs and vacuum elsewhere:
    /// `I_k = (I_a + I_b + 2√(I_a I_b) cos(Δθ − 2πk/n)) / n`.
    ///
    /// For `n ≥ 3` an unmatched port still receives light at a lattice phase
    /// difference, so roughly one click in three lands on a wrong detector.
    Multiport,
    /// Phase discriminator that routes the coherent part of the light to the
    /// matched port:
    /// `I_k = (√I_a − √I_b)²/n + 2√(I_a I_b) F_n(Δθ − 2πk/n)` with the
    /// Fejér kernel `F_n(x) = |Σ_j e^{ijx}|² / n²`.
    ///
    /// Identical to [`InterferenceModel::Multiport`] for `n = 2`.
    #[default]
    IdealDiscriminator,
}

impl InterferenceModel {
    pub fn port_intensities(self, i_a: f64, i_b: f64, delta_theta: f64, n: usize) -> PortIntensities {
        match self {
            InterferenceModel::Multiport => port_intensities(i_a, i_b, delta_theta, n),
            InterferenceModel::IdealDiscriminator => {
                let cross = (i_a * i_b).sqrt();
                let incoherent = (i_a.sqrt() - i_b.sqrt()).powi(2) / n as f64;
                (0..n)
                    .map(|k| {
                        let x = delta_theta - TAU * k as f64 / n as f64;
                        incoherent + 2.0 * cross * fejer(x, n)
                    })
                    .collect()
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InterferenceModel::Multiport => "multiport",
            InterferenceModel::IdealDiscriminator => "ideal-discriminator",
        }
    }
}

impl std::str::FromStr for InterferenceModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "multiport" => Ok(InterferenceModel::Multiport),
            "ideal" | "ideal-discriminator" => Ok(InterferenceModel::IdealDiscriminator),
            other => Err(format!(
                "unknown interference model `{other}` (expected multiport or ideal-discriminator)"
            )),
        }
    }
}

/// `|Σ_{j<n} e^{ijx}|² / n²`, written as a cosine sum to stay exact at `x = 0`.
fn fejer(x: f64, n: usize) -> f64 {
    let mut acc = n as f64;
    for m in 1..n {
        acc += 2.0 * (n - m) as f64 * (m as f64 * x).cos();
    }
    (acc / (n * n) as f64).max(0.0)
}

/// Per-arm transmittance including detector efficiency. Each arm spans half
/// of the total distance.
pub fn arm_transmittance(params: &ProtocolParams) -> f64 {
    params.eta_d * 10f64.powf(-params.alpha * (params.distance_km / 2.0) / 10.0)
}

/// Output intensities of the symmetric `n`-port for input intensities
/// `i_a`, `i_b` and phase difference `delta_theta`.
pub fn port_intensities(i_a: f64, i_b: f64, delta_theta: f64, n: usize) -> PortIntensities {
    let cross = 2.0 * (i_a * i_b).sqrt();
    (0..n)
        .map(|k| {
            let phase = delta_theta - TAU * k as f64 / n as f64;
            ((i_a + i_b + cross * phase.cos()) / n as f64).max(0.0)
        })
        .collect()
}

/// Threshold-detector click probability per port: `1 − (1 − p_d) e^{−I}`.
pub fn click_probabilities(ports: &[f64], p_d: f64) -> PortIntensities {
    ports
        .iter()
        .map(|&i| p_d - (1.0 - p_d) * (-i).exp_m1())
        .collect()
}

/// Which detectors clicked in one gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickPattern {
    mask: u32,
    n: u8,
}

impl ClickPattern {
    pub fn from_bools(clicked: &[bool]) -> Self {
        assert!(clicked.len() <= 32);
        let mask = clicked
            .iter()
            .enumerate()
            .fold(0u32, |m, (i, &c)| if c { m | (1 << i) } else { m });
        ClickPattern {
            mask,
            n: clicked.len() as u8,
        }
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn clicked(&self, port: usize) -> bool {
        port < self.len() && self.mask & (1 << port) != 0
    }

    pub fn count(&self) -> u32 {
        self.mask.count_ones()
    }

    /// The clicking detector when exactly one clicked.
    pub fn single(&self) -> Option<DetectorId> {
        (self.count() == 1).then(|| DetectorId(self.mask.trailing_zeros() as usize))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.clicked(i)).collect()
    }
}

/// Independent Bernoulli draw per port.
pub fn sample_clicks<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> ClickPattern {
    assert!(probs.len() <= 32);
    let mut mask = 0u32;
    for (i, &p) in probs.iter().enumerate() {
        if rng.random::<f64>() < p {
            mask |= 1 << i;
        }
    }
    ClickPattern {
        mask,
        n: probs.len() as u8,
    }
}

/// With probability `e_d` reports one of the other `n − 1` detectors,
/// chosen uniformly.
pub fn apply_misalignment<R: Rng + ?Sized>(
    d_true: DetectorId,
    e_d: f64,
    n: usize,
    rng: &mut R,
) -> DetectorId {
    if rng.random::<f64>() < e_d {
        let shift = rng.random_range(1..n);
        DetectorId((d_true.0 + shift) % n)
    } else {
        d_true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn arm_transmittance_examples() {
        let p = ProtocolParams::default();
        assert_abs_diff_eq!(arm_transmittance(&p), 0.145);
        assert_abs_diff_eq!(
            arm_transmittance(&p.with_distance(200.0)),
            1.45e-3,
            epsilon = 1e-15
        );
        let lossless = ProtocolParams { eta_d: 1.0, ..p };
        assert_eq!(arm_transmittance(&lossless), 1.0);
    }

    #[test]
    fn multiport_examples() {
        let p = port_intensities(1.0, 1.0, 0.0, 3);
        for (got, want) in p.iter().zip([4.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        for dt in [0.0, 1.0, 4.0] {
            for got in port_intensities(1.0, 0.0, dt, 3) {
                assert_abs_diff_eq!(got, 1.0 / 3.0, epsilon = 1e-12);
            }
        }
        let p = port_intensities(1.0, 1.0, TAU / 3.0, 3);
        for (got, want) in p.iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn ideal_discriminator_routes_lattice_phases() {
        let m = InterferenceModel::IdealDiscriminator;
        for d in 0..3 {
            let p = m.port_intensities(0.7, 0.7, TAU * d as f64 / 3.0, 3);
            for (k, v) in p.iter().enumerate() {
                let want = if k == d { 1.4 } else { 0.0 };
                assert_abs_diff_eq!(*v, want, epsilon = 1e-12);
            }
        }
        // one input dark: light spreads evenly
        for v in m.port_intensities(0.9, 0.0, 1.3, 3) {
            assert_abs_diff_eq!(v, 0.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn models_agree_for_two_ports() {
        for &(ia, ib, dt) in &[(0.3, 0.7, 0.4), (1.0, 1.0, 3.0), (0.0, 2.0, 1.1)] {
            let a = port_intensities(ia, ib, dt, 2);
            let b = InterferenceModel::IdealDiscriminator.port_intensities(ia, ib, dt, 2);
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn click_probability_examples() {
        assert_abs_diff_eq!(click_probabilities(&[0.0], 8e-8)[0], 8e-8, epsilon = 1e-20);
        assert_abs_diff_eq!(
            click_probabilities(&[0.1], 0.0)[0],
            1.0 - (-0.1f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(click_probabilities(&[1e3], 0.0)[0], 1.0);
    }

    #[test]
    fn sample_clicks_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_clicks(&[0.0; 3], &mut rng).count(), 0);
        let all = sample_clicks(&[1.0; 3], &mut rng);
        assert_eq!(all.count(), 3);
        assert_eq!(all.to_bools(), vec![true; 3]);
        assert_eq!(all.single(), None);
    }

    #[test]
    fn sample_clicks_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 1_000_000;
        let mut counts = [0u32; 3];
        for _ in 0..draws {
            let c = sample_clicks(&[0.5; 3], &mut rng);
            for (k, n) in counts.iter_mut().enumerate() {
                *n += c.clicked(k) as u32;
            }
        }
        let sigma = (0.25 / draws as f64).sqrt();
        for n in counts {
            assert!((n as f64 / draws as f64 - 0.5).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn misalignment_extremes_and_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(apply_misalignment(DetectorId(1), 0.0, 3, &mut rng), DetectorId(1));
            assert_ne!(apply_misalignment(DetectorId(1), 1.0, 3, &mut rng), DetectorId(1));
        }
        let draws = 1_000_000;
        let e_d = 0.015;
        let mut shifted = 0u32;
        let mut to_two = 0u32;
        for _ in 0..draws {
            let d = apply_misalignment(DetectorId(0), e_d, 3, &mut rng);
            shifted += (d != DetectorId(0)) as u32;
            to_two += (d == DetectorId(2)) as u32;
        }
        let rate = shifted as f64 / draws as f64;
        let sigma = (e_d * (1.0 - e_d) / draws as f64).sqrt();
        assert!((rate - e_d).abs() < 3.0 * sigma, "rate {rate}");
        // the wrong index is chosen uniformly
        let frac = to_two as f64 / shifted as f64;
        let sigma = (0.25 / shifted as f64).sqrt();
        assert!((frac - 0.5).abs() < 3.0 * sigma, "frac {frac}");
    }

    #[test]
    fn model_names_parse_back() {
        for m in [InterferenceModel::Multiport, InterferenceModel::IdealDiscriminator] {
            assert_eq!(m.name().parse::<InterferenceModel>(), Ok(m));
        }
        assert!("tritter".parse::<InterferenceModel>().is_err());
    }
}
