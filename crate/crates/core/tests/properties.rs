//! Property suites for the model invariants: spectral pairing and
//! stability, sum/product rules, normalization, oracle agreement, branch
//! interlacing, asymptotics, fit identifiability and noise robustness.

mod common;

use common::{diag, random_modes, synthetic_points, PAPER_WCS};
use num_complex::Complex;
use polariton::dispersion::{product_rule_rhs, secular_roots, sum_rule_rhs, sweep};
use polariton::fit::{fit_couplings, residual, BranchPoint, FitOptions};
use polariton::hopfield::{build_dynamical_matrix, diagonalize};
use polariton::model::{coupling_strength, nu_from_normalized_coupling, PhononMode};
use polariton::preset;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    /// g is homogeneous of degree 1/2 in omega/omega_c: scaling both mode
    /// and cavity frequency together leaves it unchanged.
    #[test]
    fn coupling_scale_invariance(
        nu in 0.0..3.0f64,
        omega in 0.1..5.0f64,
        omega_c in 0.1..5.0f64,
        a in 0.01..100.0f64,
    ) {
        let g1 = coupling_strength(nu, omega, omega_c).unwrap();
        let g2 = coupling_strength(nu, a * omega, a * omega_c).unwrap();
        prop_assert!((g1 - g2).abs() <= 1e-12 * g1.max(1e-30));
    }

    /// nu -> g/omega at resonance -> nu is the identity.
    #[test]
    fn nu_normalized_coupling_round_trip(nu in 0.0..4.0f64, omega in 0.1..5.0f64) {
        let g = coupling_strength(nu, omega, omega).unwrap();
        let back = nu_from_normalized_coupling(g / omega, omega);
        prop_assert!((back - nu).abs() <= 1e-13 * nu.max(1.0));
    }

    /// Single mode at zero detuning: the polariton splitting equals nu.
    #[test]
    fn zero_detuning_splitting(omega in 0.1..5.0f64, ratio in 0.01..1.0f64) {
        let nu = ratio * omega;
        let modes = [PhononMode::new("m", omega, nu, 0.0).unwrap()];
        let out = diag(omega, &modes);
        prop_assert!((out[1].omega - out[0].omega - nu).abs() <= 1e-10);
    }
}

/// Eigenvalues of the dynamical matrix come in exact +/- pairs: the block-
/// swapped conjugate of each coefficient vector is a left eigenvector at
/// -Omega of the same matrix entries.
#[test]
fn eigenvalue_pairing_on_the_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let modes = random_modes(&mut rng, n);
        let wc = rng.random_range(0.1..5.0);
        let m = build_dynamical_matrix(wc, &modes).unwrap();
        let dim = m.dim();
        let scale: f64 =
            m.entries().iter().map(|c| c.norm()).fold(0.0, f64::max);
        for p in diagonalize(&m).unwrap() {
            // partner vector (y*, z*, w*, x*)
            let mut c = vec![Complex::new(0.0, 0.0); dim];
            c[0] = p.y.conj();
            for (k, zk) in p.z.iter().enumerate() {
                c[1 + k] = zk.conj();
            }
            c[n + 1] = p.w.conj();
            for (k, xk) in p.x.iter().enumerate() {
                c[n + 2 + k] = xk.conj();
            }
            for j in 0..dim {
                let mut acc = Complex::new(0.0, 0.0);
                for i in 0..dim {
                    acc += c[i] * m.entries()[[i, j]];
                }
                let res = (acc + c[j] * p.omega).norm();
                assert!(res <= 1e-10 * scale, "pairing residual {res}");
            }
        }
    }
}

/// With nu >= 0 and the diamagnetic term in place the spectrum is always a
/// real, positive set obeying the sum and product rules, and every mode is
/// normalized with fractions summing to one.
#[test]
fn stability_rules_and_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..300 {
        let n = rng.random_range(0..=5);
        let modes = random_modes(&mut rng, n);
        let wc = rng.random_range(0.1..5.0);
        let out = diag(wc, &modes);
        assert_eq!(out.len(), n + 1);

        let sum: f64 = out.iter().map(|p| p.omega * p.omega).sum();
        let rhs = sum_rule_rhs(wc, &modes);
        assert!((sum - rhs).abs() <= 1e-9 * rhs, "sum rule: {sum} vs {rhs}");

        let prod: f64 = out.iter().map(|p| p.omega * p.omega).product();
        let prhs = product_rule_rhs(wc, &modes);
        assert!((prod - prhs).abs() <= 1e-9 * prhs, "product rule: {prod} vs {prhs}");

        for p in &out {
            assert!(p.omega > 0.0);
            assert!((p.bosonic_norm() - 1.0).abs() <= 1e-10);
            let total = p.photon_fraction + p.phonon_fractions.iter().sum::<f64>();
            assert!((total - 1.0).abs() <= 1e-10);
            assert!(p.photon_fraction >= -1e-10 && p.photon_fraction <= 1.0 + 1e-10);
            for &f in &p.phonon_fractions {
                assert!(f >= -1e-10 && f <= 1.0 + 1e-10);
            }
        }
    }
}

/// Diagonalization agrees with the independent secular-equation oracle.
#[test]
fn oracle_agreement_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..200 {
        let n = rng.random_range(0..=5);
        let modes = random_modes(&mut rng, n);
        let wc = rng.random_range(0.1..5.0);
        let eig = diag(wc, &modes);
        let roots = secular_roots(&modes, wc).unwrap();
        for (p, r) in eig.iter().zip(&roots) {
            assert!(((p.omega - r) / r).abs() <= 1e-9, "{} vs {r}", p.omega);
        }
    }
}

/// Between consecutive phonon poles there is exactly one branch; one more
/// sits below the lowest pole and one above the highest.
#[test]
fn branch_interlacing() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        // distinct coupled modes only, so the pole structure is simple
        let mut modes = random_modes(&mut rng, n);
        for m in &mut modes {
            m.nu = m.nu.max(0.05 * m.omega);
        }
        modes.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
        modes.dedup_by(|a, b| (a.omega - b.omega).abs() < 1e-3);
        let wc = rng.random_range(0.1..5.0);
        let out = diag(wc, &modes);
        let mut poles: Vec<f64> = modes.iter().map(|m| m.omega).collect();
        poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(out.len(), poles.len() + 1);
        for (k, p) in out.iter().enumerate() {
            if k > 0 {
                assert!(p.omega > poles[k - 1], "branch {k} below pole {}", poles[k - 1]);
            }
            if k < poles.len() {
                assert!(p.omega < poles[k], "branch {k} above pole {}", poles[k]);
            }
        }
    }
}

/// Large cavity detuning: the top branch rides the cavity line with photon
/// fraction -> 1, lower branches freeze onto fixed limits.
#[test]
fn asymptotics_at_large_cavity_frequency() {
    let material = preset::mapbi3::<f64>();
    for modes in [&material.tetragonal_modes, &material.orthorhombic_modes] {
        let w_max = modes.iter().map(|m| m.omega).fold(0.0, f64::max);
        for mult in [10.0, 30.0, 100.0] {
            let out = diag(mult * w_max, modes);
            let top = out.last().unwrap();
            assert!(top.omega >= mult * w_max);
            assert!(top.photon_fraction >= 0.99, "F_pt = {}", top.photon_fraction);
        }
        // drift over the decade [100x, 1000x] is below 1e-3 THz
        let lo = diag(100.0 * w_max, modes);
        let hi = diag(1000.0 * w_max, modes);
        for k in 0..modes.len() {
            assert!(
                (lo[k].omega - hi[k].omega).abs() <= 1e-3,
                "branch {k} drifts {}",
                (lo[k].omega - hi[k].omega).abs()
            );
        }
    }
}

/// Sweeping with a decoupled extra mode changes nothing but the extra flat
/// branch (sanity of the sweep plumbing itself).
#[test]
fn sweep_branch_count_is_constant() {
    let material = preset::mapbi3::<f64>();
    let grid: Vec<f64> = (20..=320).map(|i| 0.01 * i as f64).collect();
    let map = sweep(&material.orthorhombic_modes, &grid).unwrap();
    assert_eq!(map.points.len(), grid.len());
    for pts in &map.points {
        assert_eq!(pts.len(), 4);
    }
    for labels in &map.labels {
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3], "labels form a permutation");
    }
}

/// Round-trip identifiability: noiseless points spanning the anticrossings
/// pin the couplings to better than 1% relative.
#[test]
fn fit_round_trip_identifiability() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..6 {
        let n = rng.random_range(1..=3);
        let mut modes: Vec<PhononMode<f64>> = Vec::new();
        while modes.len() < n {
            let omega: f64 = rng.random_range(0.5..2.5);
            if modes.iter().all(|m| (m.omega - omega).abs() > 0.25) {
                let ratio = rng.random_range(0.1..0.5);
                modes
                    .push(PhononMode::new(format!("m{}", modes.len()), omega, ratio * omega, 0.0)
                        .unwrap());
            }
        }
        let wcs: Vec<f64> = (1..=10).map(|i| 0.3 * i as f64).collect();
        let pts = synthetic_points(&modes, &wcs);
        let fit = fit_couplings(&pts, &modes, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        for (f, m) in fit.nu.iter().zip(&modes) {
            assert!(
                ((f - m.nu) / m.nu).abs() <= 0.01,
                "nu {} fitted as {f} (omega {})",
                m.nu,
                m.omega
            );
        }
    }
}

/// Gaussian noise of 0.01 THz on the synthetic points leaves the recovered
/// normalized couplings within +/-0.02 at least 95% of the time.
#[test]
fn fit_noise_robustness() {
    let material = preset::mapbi3::<f64>();
    let modes = &material.tetragonal_modes;
    let clean = synthetic_points(modes, &PAPER_WCS);
    let sigma = 0.01;
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    let mut gauss = move || {
        // Box-Muller
        let u1: f64 = rng.random_range(1e-12..1.0);
        let u2: f64 = rng.random_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let opts = FitOptions { coarse_steps: 10, ..FitOptions::default() };
    let mut passes = 0;
    let trials = 100;
    for _ in 0..trials {
        let noisy: Vec<BranchPoint<f64>> = clean
            .iter()
            .map(|p| BranchPoint::new(p.omega_c, p.omega_meas + sigma * gauss()).unwrap())
            .collect();
        let fit = fit_couplings(&noisy, modes, &opts).unwrap();
        let ok = (fit.normalized_couplings[0] - 0.36).abs() <= 0.02
            && (fit.normalized_couplings[1] - 0.35).abs() <= 0.02;
        if ok {
            passes += 1;
        }
    }
    assert!(passes >= 95, "only {passes}/{trials} noisy fits within +/-0.02");
}

/// The residual is strictly positive for perturbed parameters and exactly
/// reproducible (determinism of the whole objective path).
#[test]
fn residual_determinism() {
    let material = preset::mapbi3::<f64>();
    let modes = &material.orthorhombic_modes;
    let omegas: Vec<f64> = modes.iter().map(|m| m.omega).collect();
    let nus: Vec<f64> = modes.iter().map(|m| m.nu).collect();
    let pts = synthetic_points(modes, &PAPER_WCS);
    let r1 = residual(&nus, &omegas, &pts).unwrap();
    let r2 = residual(&nus, &omegas, &pts).unwrap();
    assert_eq!(r1.to_bits(), r2.to_bits());
    assert!(r1 < 1e-12);
}
