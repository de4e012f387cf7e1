//! Encoding, ideal detector response and key reconciliation.
//!
//! Alice and Bob each encode a key symbol `κ ∈ {0,…,n−1}` into the phase of a
//! coherent pulse, on top of a private random phase `φ`:
//! `θ = φ + 2πκ/n`. The middle node reports which of its `n` detectors
//! fired. Bob then shifts his symbol by the detector index and back by the
//! announced random-phase offset, after which his symbol equals Alice's.
//!
//! Everything here is exact arithmetic on the phase lattice; noise lives in
//! [`crate::photonics`].

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used by [`ideal_detector`] when none is given, in radians.
pub const DEFAULT_LATTICE_TOL: f64 = 1e-9;

/// A key symbol in `{0,…,n−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Trit(u32);

impl Trit {
    pub fn new(value: u32, n: usize) -> Result<Self> {
        if (value as usize) < n {
            Ok(Trit(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "key symbol {value} out of range for n = {n}"
            )))
        }
    }

    /// Reduces an arbitrary integer modulo `n`.
    pub fn wrapping(value: i64, n: usize) -> Self {
        Trit(value.rem_euclid(n as i64) as u32)
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Trit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A random phase together with the slice it falls in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    radians: f64,
    slice: usize,
}

impl PhaseSample {
    /// Wraps `radians` into `[0, 2π)` and records its slice out of `slices`.
    pub fn new(radians: f64, slices: usize) -> Self {
        let radians = wrap_angle(radians);
        PhaseSample {
            radians,
            slice: slice_index(radians, slices),
        }
    }

    pub fn radians(&self) -> f64 {
        self.radians
    }

    pub fn slice(&self) -> usize {
        self.slice
    }
}

/// Index of the detector that fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectorId(pub usize);

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.0)
    }
}

/// The multiple `s` of `2π/n` separating the announced random phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseOffsetClass(pub usize);

/// Result of reconciling one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiftOutcome {
    pub detector: DetectorId,
    pub kappa_b_prime: Trit,
    pub kappa_b_double_prime: Trit,
    pub accepted: bool,
}

/// Outcome of comparing two announced slice indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceMatch {
    pub accepted: bool,
    pub offset: PhaseOffsetClass,
    /// Distance, in slices, from the slice difference to the nearest
    /// multiple of `M/n`.
    pub residual_slices: f64,
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Circular distance between two angles, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Phase of the prepared coherent state: `φ + 2πκ/n (mod 2π)`.
pub fn total_phase(kappa: Trit, phi: PhaseSample, n: usize) -> f64 {
    wrap_angle(phi.radians + TAU * f64::from(kappa.0) / n as f64)
}

/// Signed modular difference `(θ_a − θ_b) mod 2π`.
pub fn phase_delta(theta_a: f64, theta_b: f64) -> f64 {
    wrap_angle(theta_a - theta_b)
}

fn nearest_lattice_point(delta: f64, n: usize, tol: f64) -> Result<usize> {
    let step = TAU / n as f64;
    let k = (wrap_angle(delta) / step).round() as usize % n;
    if circular_distance(delta, step * k as f64) <= tol {
        Ok(k)
    } else {
        Err(Error::NotOnLattice { delta, n, tol })
    }
}

/// Detector that fires for an exact lattice phase difference: `D_k` for
/// `Δ = 2πk/n`.
pub fn ideal_detector(delta: f64, n: usize, tol: f64) -> Result<DetectorId> {
    nearest_lattice_point(delta, n, tol).map(DetectorId)
}

/// First flip: `κ_b' = κ_b + d (mod n)`.
pub fn flip_by_detector(kappa_b: Trit, d: DetectorId, n: usize) -> Trit {
    Trit::wrapping(i64::from(kappa_b.0) + d.0 as i64, n)
}

/// Second flip: `κ_b'' = κ_b' − s (mod n)`.
pub fn flip_by_phase(kappa_b_prime: Trit, s: PhaseOffsetClass, n: usize) -> Trit {
    Trit::wrapping(i64::from(kappa_b_prime.0) - s.0 as i64, n)
}

/// Both flips for a detector click `d` and an announced offset class `s`.
pub fn reconcile(kappa_b: Trit, d: DetectorId, s: PhaseOffsetClass, n: usize) -> SiftOutcome {
    let kappa_b_prime = flip_by_detector(kappa_b, d, n);
    SiftOutcome {
        detector: d,
        kappa_b_prime,
        kappa_b_double_prime: flip_by_phase(kappa_b_prime, s, n),
        accepted: true,
    }
}

/// Runs one ideal round end to end. The random phases must differ by an
/// exact multiple of `2π/n`.
pub fn sift_round(
    kappa_a: Trit,
    kappa_b: Trit,
    phi_a: PhaseSample,
    phi_b: PhaseSample,
    n: usize,
) -> Result<SiftOutcome> {
    let s = nearest_lattice_point(
        phase_delta(phi_a.radians, phi_b.radians),
        n,
        DEFAULT_LATTICE_TOL,
    )?;
    let delta = phase_delta(total_phase(kappa_a, phi_a, n), total_phase(kappa_b, phi_b, n));
    let d = ideal_detector(delta, n, DEFAULT_LATTICE_TOL)?;
    Ok(reconcile(kappa_b, d, PhaseOffsetClass(s), n))
}

/// Slice containing `phi`: `floor(φ·M/2π)` after wrapping into `[0, 2π)`.
pub fn slice_index(phi: f64, slices: usize) -> usize {
    assert!(slices >= 1, "need at least one phase slice");
    let idx = (wrap_angle(phi) * slices as f64 / TAU).floor() as usize;
    idx.min(slices - 1)
}

/// Compares announced slice indices. The slice difference is matched to the
/// nearest multiple of `M/n`; the round is kept when it lies within half a
/// slice of it.
pub fn slice_match(m_a: usize, m_b: usize, slices: usize, n: usize) -> SliceMatch {
    debug_assert!(m_a < slices && m_b < slices);
    let d = (m_a + slices - m_b) % slices;
    let (k, signed) = nearest_offset(d, slices, n);
    let residual_slices = signed.abs();
    SliceMatch {
        accepted: residual_slices <= 0.5,
        offset: PhaseOffsetClass(k % n),
        residual_slices,
    }
}

/// Nearest multiple `k` of `M/n` to slice difference `d`, and `d − k·M/n`.
pub(crate) fn nearest_offset(d: usize, slices: usize, n: usize) -> (usize, f64) {
    let spacing = slices as f64 / n as f64;
    let k = (d as f64 / spacing).round() as usize;
    (k, d as f64 - k as f64 * spacing)
}

/// Slice differences the sifting step keeps, with their signed residuals in
/// slices. Every accepted difference appears exactly once.
pub fn accepted_slice_offsets(slices: usize, n: usize) -> Vec<(PhaseOffsetClass, f64)> {
    (0..slices)
        .map(|d| (d, slice_match(d, 0, slices, n)))
        .filter(|(_, m)| m.accepted)
        .map(|(d, m)| (m.offset, nearest_offset(d, slices, n).1))
        .collect()
}

/// Probability that two uniformly random slice indices pass [`slice_match`].
pub fn sift_acceptance(slices: usize, n: usize) -> f64 {
    accepted_slice_offsets(slices, n).len() as f64 / slices as f64
}

/// One row of the key-correspondence table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrespondenceRow {
    pub kappa_a: Trit,
    pub kappa_b: Trit,
    pub offset: PhaseOffsetClass,
    /// `Δ_φ` as a multiple of `2π/n`.
    pub delta_class: usize,
    pub detector: DetectorId,
    pub kappa_b_prime: Trit,
    pub kappa_b_double_prime: Trit,
}

/// Enumerates all `n²` key pairs for random phases separated by `2πs/n`.
pub fn correspondence_table(n: usize, s: PhaseOffsetClass) -> Result<Vec<CorrespondenceRow>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n}, need n >= 2")));
    }
    if s.0 >= n {
        return Err(Error::InvalidArgument(format!(
            "offset class {} out of range for n = {n}",
            s.0
        )));
    }
    let phi_b = PhaseSample::new(0.0, n);
    let phi_a = PhaseSample::new(TAU * s.0 as f64 / n as f64, n);
    let mut rows = Vec::with_capacity(n * n);
    for a in 0..n as u32 {
        for b in 0..n as u32 {
            let kappa_a = Trit(a);
            let kappa_b = Trit(b);
            let outcome = sift_round(kappa_a, kappa_b, phi_a, phi_b, n)?;
            rows.push(CorrespondenceRow {
                kappa_a,
                kappa_b,
                offset: s,
                delta_class: outcome.detector.0,
                detector: outcome.detector,
                kappa_b_prime: outcome.kappa_b_prime,
                kappa_b_double_prime: outcome.kappa_b_double_prime,
            });
        }
    }
    Ok(rows)
}
