//! Shared helpers for the integration suites.

use polariton::fit::BranchPoint;
use polariton::hopfield::{build_dynamical_matrix, diagonalize, PolaritonMode};
use polariton::model::PhononMode;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Cavity frequencies of the eight slot lengths {30,...,160} um under the
/// default calibration (91.2 THz um / length).
pub const PAPER_WCS: [f64; 8] =
    [3.04, 2.28, 1.824, 1.52, 1.3028571428571427, 1.14, 0.76, 0.57];

/// Random mode set with `n` phonons, frequencies in [0.1, 5] THz and
/// coupling ratios nu/omega in [0, 1].
pub fn random_modes(rng: &mut ChaCha8Rng, n: usize) -> Vec<PhononMode<f64>> {
    (0..n)
        .map(|i| {
            let omega = rng.random_range(0.1..5.0);
            let ratio = rng.random_range(0.0..1.0);
            PhononMode::new(format!("m{i}"), omega, ratio * omega, 0.0).unwrap()
        })
        .collect()
}

pub fn diag(omega_c: f64, modes: &[PhononMode<f64>]) -> Vec<PolaritonMode<f64>> {
    diagonalize(&build_dynamical_matrix(omega_c, modes).unwrap()).unwrap()
}

/// Noiseless branch points: every polariton branch at every listed cavity
/// frequency.
pub fn synthetic_points(modes: &[PhononMode<f64>], wcs: &[f64]) -> Vec<BranchPoint<f64>> {
    let mut pts = Vec::new();
    for &wc in wcs {
        for p in diag(wc, modes) {
            pts.push(BranchPoint::new(wc, p.omega).unwrap());
        }
    }
    pts
}
