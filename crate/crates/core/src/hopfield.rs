//! Construction and diagonalization of the Bogoliubov dynamical matrix for
//! one cavity mode ultrastrongly coupled to N phonon modes.
//!
//! # Model and derivation
//!
//! The Hamiltonian (hbar = 1, frequencies in THz) is
//!
//! ```text
//! H = w_c a+ a + sum_k w_k b_k+ b_k
//!     - i sum_k g_k (b_k - b_k+)(a + a+)
//!     + D (a + a+)^2 ,          D = sum_k g_k^2 / w_k ,
//! ```
//!
//! with `g_k = (nu_k / 2) sqrt(w_k / w_c)` and `nu_k` the effective ionic
//! plasma frequency of phonon mode k. The last term is the diamagnetic (A^2)
//! contribution; it guarantees a real, stable spectrum for every nu_k >= 0.
//!
//! ## Dynamical matrix
//!
//! In the operator basis `v = (a, b_1..b_N, a+, b_1+..b_N+)` the Heisenberg
//! equations `i dv/dt = [v, H] = M v` define the dynamical matrix M.
//! Evaluating the commutators:
//!
//! ```text
//! [a,    H] = (w_c + 2D) a - i sum_k g_k b_k + 2D a+ + i sum_k g_k b_k+
//! [b_k,  H] = i g_k a + w_k b_k + i g_k a+
//! [a+,   H] = -2D a + i sum_k g_k b_k - (w_c + 2D) a+ - i sum_k g_k b_k+
//! [b_k+, H] = i g_k a + i g_k a+ - w_k b_k+
//! ```
//!
//! which gives the rows implemented in [`build_dynamical_matrix`]. The
//! spectrum of M is symmetric under `Omega -> -Omega`; the physical
//! polariton frequencies are the N+1 positive eigenvalues.
//!
//! ## Polariton operators are left eigenvectors
//!
//! A polariton annihilation operator is the linear form
//! `p = w a + sum_k x_k b_k + y a+ + sum_k z_k b_k+ = c^T v`. The condition
//! `[p, H] = Omega p` that makes `H = sum Omega p+ p` diagonal reads
//! `c^T M v = Omega c^T v`, i.e. `M^T c = Omega c`: the coefficient vector is
//! a *left* eigenvector of M. Bosonic commutation `[p, p+] = 1` fixes the
//! normalization `|w|^2 + sum|x|^2 - |y|^2 - sum|z|^2 = +1`; the eigenvectors
//! with negative Bogoliubov norm are the redundant creation partners at
//! `-Omega` and are discarded.
//!
//! ## Stable reduction to a symmetric problem
//!
//! In quadratures `X_a = (a + a+)/sqrt(2)`, `P_a = i(a+ - a)/sqrt(2)` (and
//! the phonon quadratures rotated by 90 degrees, `Xt_k = P_k`,
//! `Pt_k = -X_k`, which turns the `P_k X_a` coupling into `Xt_k X_a`), H is
//! `(X^T V X + P^T T P)/2` with `T = diag(w_c, w_k)` and
//!
//! ```text
//! V = T + [[4D, 2 g_k], [2 g_k, 0]]   (cavity row/column only)
//! ```
//!
//! so `X'' = -T V X` and `Omega^2` are the eigenvalues of the real symmetric
//! positive-definite matrix `K = T^(1/2) V T^(1/2)`:
//!
//! ```text
//! K[0,0] = w_c (w_c + 4D)        (= w_c^2 + sum nu_k^2 with the A^2 term)
//! K[0,k] = 2 g_k sqrt(w_c w_k)   (= nu_k w_k)
//! K[k,k] = w_k^2
//! ```
//!
//! With the A^2 term present, the Schur complement of the phonon block in V
//! is exactly `w_c > 0`, so K is positive definite and the spectrum is real:
//! dropping the term (see [`build_dynamical_matrix_with`]) makes K
//! indefinite at large coupling, which surfaces as
//! [`Error::Instability`](crate::Error::Instability).
//!
//! An orthonormal eigenpair `(Omega^2, eta)` of K lifts exactly to the left
//! eigenvector of M at `+Omega`: with `r = sqrt(Omega/w_c)` and
//! `r_k = sqrt(Omega/w_k)`,
//!
//! ```text
//! w = eta_0/2 (r + 1/r)          y = eta_0/2 (r - 1/r)
//! x_k = -i eta_k/2 (r_k + 1/r_k) z_k = +i eta_k/2 (r_k - 1/r_k)
//! ```
//!
//! (substituting into `M^T c = Omega c` reproduces the K eigenproblem; the
//! residual of that identity is verified numerically on every call). The
//! Bogoliubov norm collapses to `sum_k eta_k^2 = 1` and the photon/phonon
//! fractions to `F_pt = |w|^2 - |y|^2 = eta_0^2`,
//! `F_k = |x_k|^2 - |z_k|^2 = eta_k^2`, so fractions are non-negative and
//! sum to one by construction.

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::model::{coupling_strength, PhononMode};
use crate::{lit, Real};
use ndarray::Array2;
use num_complex::Complex;

/// Relative threshold on |Im Omega| above which the spectrum is reported as
/// unstable, in units of the largest bare frequency.
const INSTABILITY_REL: f64 = 1e-8;

/// Frequencies closer than this (relative to the largest bare frequency)
/// are treated as one degenerate block when ordering coefficient vectors.
const DEGENERACY_REL: f64 = 1e-9;

/// Bogoliubov dynamical matrix of the coupled cavity-phonon system, in the
/// operator basis `(a, b_1..b_N, a+, b_1+..b_N+)`.
///
/// Built by [`build_dynamical_matrix`]; the entries are exposed read-only so
/// the construction invariants cannot be broken after the fact.
#[derive(Debug, Clone)]
pub struct DynamicalMatrix<T: Real> {
    entries: Array2<Complex<T>>,
    omega_c: T,
    modes: Vec<PhononMode<T>>,
}

impl<T: Real> DynamicalMatrix<T> {
    /// Matrix dimension, `2 (N + 1)`.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex<T>> {
        &self.entries
    }

    pub fn omega_c(&self) -> T {
        self.omega_c
    }

    pub fn modes(&self) -> &[PhononMode<T>] {
        &self.modes
    }
}

/// One polariton eigenmode: frequency, Hopfield coefficients, and fractions.
///
/// `w` and `x` multiply the annihilation operators of the photon and of each
/// phonon; `y` and `z` are the anti-resonant (creation-operator)
/// coefficients. The global phase is fixed so that `w` is real and
/// non-negative (falling back to the first non-negligible coefficient for
/// photon-free modes).
#[derive(Debug, Clone)]
pub struct PolaritonMode<T: Real> {
    /// Polariton frequency Omega, THz.
    pub omega: T,
    pub w: Complex<T>,
    pub x: Vec<Complex<T>>,
    pub y: Complex<T>,
    pub z: Vec<Complex<T>>,
    /// `|w|^2 - |y|^2`.
    pub photon_fraction: T,
    /// `|x_k|^2 - |z_k|^2` per phonon mode, same order as the mode set.
    pub phonon_fractions: Vec<T>,
}

impl<T: Real> PolaritonMode<T> {
    /// Bogoliubov norm `|w|^2 + sum|x|^2 - |y|^2 - sum|z|^2`; +1 for a
    /// properly normalized annihilation-type mode.
    pub fn bosonic_norm(&self) -> T {
        let plus = self.w.norm_sqr() + self.x.iter().map(|c| c.norm_sqr()).sum::<T>();
        let minus = self.y.norm_sqr() + self.z.iter().map(|c| c.norm_sqr()).sum::<T>();
        plus - minus
    }

    /// Photon and phonon fractions recomputed from the coefficients.
    ///
    /// Fails with a contract violation if the mode is not normalized to the
    /// Bogoliubov norm +1 (tolerance 1e-10 at f64 precision).
    pub fn fractions(&self) -> Result<(T, Vec<T>)> {
        let tol = lit::<T>(1e-10).max(T::epsilon() * lit(1e4));
        let norm = self.bosonic_norm();
        if (norm - T::one()).abs() > tol {
            return Err(Error::Contract(format!(
                "polariton mode is not normalized: bosonic norm = {norm}, expected 1"
            )));
        }
        let photon = self.w.norm_sqr() - self.y.norm_sqr();
        let phonon: Vec<T> =
            self.x.iter().zip(&self.z).map(|(xk, zk)| xk.norm_sqr() - zk.norm_sqr()).collect();
        Ok((photon, phonon))
    }
}

fn validate_inputs<T: Real>(omega_c: T, modes: &[PhononMode<T>]) -> Result<()> {
    if !(omega_c > T::zero()) {
        return Err(Error::domain(format!("cavity frequency must be > 0, got {omega_c}")));
    }
    for m in modes {
        m.validate()?;
    }
    Ok(())
}

/// Diamagnetic coefficient `D = sum_k g_k^2 / w_k`.
pub fn diamagnetic_coefficient<T: Real>(omega_c: T, modes: &[PhononMode<T>]) -> Result<T> {
    validate_inputs(omega_c, modes)?;
    let mut d = T::zero();
    for m in modes {
        let g = coupling_strength(m.nu, m.omega, omega_c)?;
        d += g * g / m.omega;
    }
    Ok(d)
}

/// Build the dynamical matrix with the diamagnetic term included.
pub fn build_dynamical_matrix<T: Real>(
    omega_c: T,
    modes: &[PhononMode<T>],
) -> Result<DynamicalMatrix<T>> {
    build_dynamical_matrix_with(omega_c, modes, true)
}

/// Build the dynamical matrix, optionally dropping the diamagnetic (A^2)
/// term.
///
/// Dropping it is physically inconsistent in the ultrastrong-coupling regime
/// and makes the spectrum unstable at large `nu` (diagonalization then
/// returns [`Error::Instability`]); the toggle exists to demonstrate exactly
/// that.
pub fn build_dynamical_matrix_with<T: Real>(
    omega_c: T,
    modes: &[PhononMode<T>],
    include_diamagnetic: bool,
) -> Result<DynamicalMatrix<T>> {
    validate_inputs(omega_c, modes)?;
    let n = modes.len();
    let dim = 2 * (n + 1);
    let zero = Complex::new(T::zero(), T::zero());
    let mut m = Array2::from_elem((dim, dim), zero);

    let d = if include_diamagnetic {
        diamagnetic_coefficient(omega_c, modes)?
    } else {
        T::zero()
    };
    let two_d = d + d;
    let re = |x: T| Complex::new(x, T::zero());
    let im = |x: T| Complex::new(T::zero(), x);

    let a = 0;
    let ad = n + 1;
    m[[a, a]] = re(omega_c + two_d);
    m[[a, ad]] = re(two_d);
    m[[ad, a]] = re(-two_d);
    m[[ad, ad]] = re(-(omega_c + two_d));
    for (k, mode) in modes.iter().enumerate() {
        let g = coupling_strength(mode.nu, mode.omega, omega_c)?;
        let b = 1 + k;
        let bd = n + 2 + k;
        m[[a, b]] = im(-g);
        m[[a, bd]] = im(g);
        m[[b, a]] = im(g);
        m[[b, b]] = re(mode.omega);
        m[[b, ad]] = im(g);
        m[[ad, b]] = im(g);
        m[[ad, bd]] = im(-g);
        m[[bd, a]] = im(g);
        m[[bd, ad]] = im(g);
        m[[bd, bd]] = re(-mode.omega);
    }
    Ok(DynamicalMatrix { entries: m, omega_c, modes: modes.to_vec() })
}

/// Parameters read back off the matrix entries, so the eigensolver works on
/// what was actually built (including the diamagnetic toggle).
struct MatrixParams<T> {
    omega_c: T,
    two_d: T,
    g: Vec<T>,
    omegas: Vec<T>,
}

fn read_params<T: Real>(m: &DynamicalMatrix<T>) -> MatrixParams<T> {
    let n = m.modes.len();
    let two_d = m.entries[[0, n + 1]].re;
    let omega_c = m.entries[[0, 0]].re - two_d;
    let g: Vec<T> = (0..n).map(|k| m.entries[[1 + k, 0]].im).collect();
    let omegas: Vec<T> = (0..n).map(|k| m.entries[[1 + k, 1 + k]].re).collect();
    MatrixParams { omega_c, two_d, g, omegas }
}

/// Diagonalize the dynamical matrix.
///
/// Returns the N+1 positive-frequency, positive-norm polariton modes sorted
/// by ascending frequency. Coefficients are the left-eigenvector components
/// of M (see the module docs for the reduction used to compute them); every
/// returned vector is verified against the matrix entries via the residual
/// `|c^T M - Omega c^T|`.
pub fn diagonalize<T: Real>(m: &DynamicalMatrix<T>) -> Result<Vec<PolaritonMode<T>>> {
    let params = read_params(m);
    let n = params.omegas.len();
    let max_freq = params
        .omegas
        .iter()
        .copied()
        .fold(params.omega_c, T::max);

    // K = T^(1/2) V T^(1/2), eigenvalues Omega^2 (module docs).
    let mut k = Array2::<T>::zeros((n + 1, n + 1));
    k[[0, 0]] = params.omega_c * (params.omega_c + params.two_d + params.two_d);
    for i in 0..n {
        let off = lit::<T>(2.0) * params.g[i] * (params.omega_c * params.omegas[i]).sqrt();
        k[[0, 1 + i]] = off;
        k[[1 + i, 0]] = off;
        k[[1 + i, 1 + i]] = params.omegas[i] * params.omegas[i];
    }
    let (u, eta) = symmetric_eigen(&k);

    let imag_threshold = lit::<T>(INSTABILITY_REL) * max_freq;
    let mut out = Vec::with_capacity(n + 1);
    for (alpha, &u_a) in u.iter().enumerate() {
        if u_a <= imag_threshold * imag_threshold {
            let detail = if u_a < T::zero() {
                format!("Omega^2 = {u_a} < 0, |Im Omega| = {}", (-u_a).sqrt())
            } else {
                format!("Omega^2 = {u_a} is zero within tolerance")
            };
            return Err(Error::Instability(format!(
                "{detail} (threshold {imag_threshold}); the spectrum is not a stable set of \
                 positive frequencies for these parameters"
            )));
        }
        let omega = u_a.sqrt();
        let mut col: Vec<T> = (0..n + 1).map(|i| eta[[i, alpha]]).collect();
        if col[0] < T::zero() {
            for v in &mut col {
                *v = -*v;
            }
        }
        out.push(lift_mode(omega, &col, &params));
    }

    fix_phases(&mut out);
    order_degenerate_blocks(&mut out, lit::<T>(DEGENERACY_REL) * max_freq);
    verify_left_eigenvectors(m, &out)?;
    Ok(out)
}

/// Map an orthonormal K eigenvector to the left eigenvector of M at +Omega.
fn lift_mode<T: Real>(omega: T, eta: &[T], p: &MatrixParams<T>) -> PolaritonMode<T> {
    let half = lit::<T>(0.5);
    let r = (omega / p.omega_c).sqrt();
    let w = Complex::new(half * eta[0] * (r + r.recip()), T::zero());
    let y = Complex::new(half * eta[0] * (r - r.recip()), T::zero());
    let mut x = Vec::with_capacity(p.omegas.len());
    let mut z = Vec::with_capacity(p.omegas.len());
    for (k, &wk) in p.omegas.iter().enumerate() {
        let rk = (omega / wk).sqrt();
        x.push(Complex::new(T::zero(), -half * eta[1 + k] * (rk + rk.recip())));
        z.push(Complex::new(T::zero(), half * eta[1 + k] * (rk - rk.recip())));
    }
    let photon_fraction = w.norm_sqr() - y.norm_sqr();
    let phonon_fractions: Vec<T> =
        x.iter().zip(&z).map(|(xk, zk)| xk.norm_sqr() - zk.norm_sqr()).collect();
    PolaritonMode { omega, w, x, y, z, photon_fraction, phonon_fractions }
}

/// Global phase convention: `w` real >= 0; when the photon amplitude is
/// negligible, rotate so the first non-negligible coefficient (basis order
/// a, b_1..b_N, a+, b_1+..b_N+) is real positive.
fn fix_phases<T: Real>(modes: &mut [PolaritonMode<T>]) {
    let eps = lit::<T>(1e-12).max(T::epsilon() * lit(8.0));
    for mode in modes {
        if mode.w.re >= eps {
            continue;
        }
        let coeffs: Vec<Complex<T>> = std::iter::once(mode.w)
            .chain(mode.x.iter().copied())
            .chain(std::iter::once(mode.y))
            .chain(mode.z.iter().copied())
            .collect();
        if let Some(c) = coeffs.iter().find(|c| c.norm_sqr().sqrt() >= eps) {
            let phase = c.conj() / Complex::new(c.norm_sqr().sqrt(), T::zero());
            mode.w = mode.w * phase;
            mode.y = mode.y * phase;
            for xk in &mut mode.x {
                *xk = *xk * phase;
            }
            for zk in &mut mode.z {
                *zk = *zk * phase;
            }
        }
    }
}

/// Within blocks of (numerically) equal frequency, order by descending
/// photon fraction so degenerate output is deterministic.
fn order_degenerate_blocks<T: Real>(modes: &mut [PolaritonMode<T>], tol: T) {
    let len = modes.len();
    let mut start = 0;
    while start < len {
        let mut end = start + 1;
        while end < len && (modes[end].omega - modes[end - 1].omega).abs() < tol {
            end += 1;
        }
        if end - start > 1 {
            modes[start..end].sort_by(|a, b| {
                b.photon_fraction.partial_cmp(&a.photon_fraction).expect("finite fractions")
            });
        }
        start = end;
    }
}

/// Check `c^T M = Omega c^T` against the stored entries for every mode.
fn verify_left_eigenvectors<T: Real>(
    m: &DynamicalMatrix<T>,
    modes: &[PolaritonMode<T>],
) -> Result<()> {
    let dim = m.dim();
    let scale = m
        .entries
        .iter()
        .map(|c| c.norm_sqr().sqrt())
        .fold(T::zero(), T::max)
        .max(T::one());
    let tol = scale * lit::<T>(1e-9).max(T::epsilon() * lit(1e3));
    for mode in modes {
        let c: Vec<Complex<T>> = std::iter::once(mode.w)
            .chain(mode.x.iter().copied())
            .chain(std::iter::once(mode.y))
            .chain(mode.z.iter().copied())
            .collect();
        let mut worst = T::zero();
        for j in 0..dim {
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 0..dim {
                acc = acc + c[i] * m.entries[[i, j]];
            }
            let res = acc - c[j] * Complex::new(mode.omega, T::zero());
            worst = worst.max(res.norm_sqr().sqrt());
        }
        if worst > tol {
            return Err(Error::Numerical(format!(
                "left-eigenvector residual {worst} exceeds tolerance {tol} at Omega = {} \
                 (matrix does not match its declared structure)",
                mode.omega
            )));
        }
    }
    Ok(())
}
