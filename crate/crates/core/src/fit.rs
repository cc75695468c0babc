//! Recovery of effective ionic plasma frequencies (hence normalized
//! couplings) from measured polariton branch points at fixed phonon
//! frequencies.
//!
//! The objective is the weighted rms distance between measured branch
//! frequencies and the model branches diagonalized at each point's cavity
//! frequency. Branch assignment switches introduce kinks, so the optimizer
//! is derivative-free: a coarse logarithmic grid over `nu/omega` seeds a
//! coordinate-wise quadratic descent with per-coordinate adaptive steps.
//! Both stages are fully deterministic.

use crate::error::{Error, Result};
use crate::hopfield::{build_dynamical_matrix, diagonalize};
use crate::model::PhononMode;
use crate::{lit, Real};

/// One measured polariton branch point.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint<T: Real> {
    /// Bare cavity frequency, THz (convert slot lengths before building).
    pub omega_c: T,
    /// Measured polariton peak frequency, THz.
    pub omega_meas: T,
    /// Non-negative fit weight; defaults to 1.
    pub weight: T,
    /// Optional 0-based index of the branch (ascending in frequency) this
    /// point belongs to; `None` assigns by nearest predicted frequency.
    pub branch_hint: Option<usize>,
}

impl<T: Real> BranchPoint<T> {
    pub fn new(omega_c: T, omega_meas: T) -> Result<Self> {
        let p = BranchPoint { omega_c, omega_meas, weight: T::one(), branch_hint: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_weight(mut self, weight: T) -> Result<Self> {
        self.weight = weight;
        self.validate()?;
        Ok(self)
    }

    pub fn with_branch_hint(mut self, branch: usize) -> Self {
        self.branch_hint = Some(branch);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c > T::zero()) || !(self.omega_meas > T::zero()) {
            return Err(Error::domain(format!(
                "branch point frequencies must be > 0, got omega_c={}, omega_meas={}",
                self.omega_c, self.omega_meas
            )));
        }
        if !(self.weight >= T::zero()) || !self.weight.is_finite() {
            return Err(Error::domain(format!(
                "branch point weight must be finite and >= 0, got {}",
                self.weight
            )));
        }
        Ok(())
    }
}

/// Knobs of [`fit_couplings`]; the defaults implement the documented
/// deterministic procedure.
#[derive(Debug, Clone)]
pub struct FitOptions<T: Real> {
    /// Upper bound for each nu; default `2 * max(omega)`.
    pub nu_max: Option<T>,
    /// Grid steps per mode in the coarse initialization.
    pub coarse_steps: usize,
    /// Coarse grid spans `nu/omega` in `[coarse_ratio_lo, coarse_ratio_hi]`,
    /// geometrically spaced.
    pub coarse_ratio_lo: T,
    pub coarse_ratio_hi: T,
    /// Cap on total coarse evaluations; steps per mode shrink to respect it
    /// when many modes are fitted at once.
    pub max_coarse_evals: usize,
    /// The coarse stage scores on at most this many points (even stride).
    pub decimate_to: usize,
    /// Stop when a full descent pass improves the rms residual by less than
    /// this (THz) and all steps have collapsed.
    pub tol: T,
    pub max_passes: usize,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        FitOptions {
            nu_max: None,
            coarse_steps: 20,
            coarse_ratio_lo: lit(0.05),
            coarse_ratio_hi: T::one(),
            max_coarse_evals: 200_000,
            decimate_to: 12,
            tol: lit(1e-6),
            max_passes: 400,
        }
    }
}

/// Outcome of a coupling fit.
#[derive(Debug, Clone)]
pub struct FitResult<T: Real> {
    pub labels: Vec<String>,
    /// The fixed phonon frequencies used, THz.
    pub omegas: Vec<T>,
    /// Fitted effective ionic plasma frequencies, THz.
    pub nu: Vec<T>,
    /// `nu / (2 omega)` per mode: g/omega evaluated at cavity-phonon
    /// resonance.
    pub normalized_couplings: Vec<T>,
    /// Weighted rms frequency error at the fitted parameters, THz.
    pub rms_residual: T,
    /// Signed predicted-minus-measured error per input point, THz.
    pub per_point_residuals: Vec<T>,
    /// Descent passes executed.
    pub iterations: usize,
    pub converged: bool,
    /// Full-point-set rms after the coarse stage and after each pass;
    /// non-increasing by construction.
    pub residual_history: Vec<T>,
}

/// Model branch frequencies at one cavity frequency, with a tiny cache keyed
/// on `omega_c` since measured sets repeat cavity frequencies across
/// branches.
struct BranchEval<'a, T: Real> {
    modes: Vec<PhononMode<T>>,
    cache: Vec<(T, Vec<T>)>,
    _marker: std::marker::PhantomData<&'a ()>,
}

impl<T: Real> BranchEval<'_, T> {
    fn new(omegas: &[T], nu: &[T]) -> Result<Self> {
        let modes = omegas
            .iter()
            .zip(nu)
            .enumerate()
            .map(|(i, (&w, &n))| PhononMode::new(format!("m{i}"), w, n, T::zero()))
            .collect::<Result<Vec<_>>>()?;
        Ok(BranchEval { modes, cache: Vec::new(), _marker: std::marker::PhantomData })
    }

    fn frequencies(&mut self, omega_c: T) -> Result<&[T]> {
        if let Some(pos) = self.cache.iter().position(|(wc, _)| *wc == omega_c) {
            return Ok(&self.cache[pos].1);
        }
        let m = build_dynamical_matrix(omega_c, &self.modes)?;
        let freqs: Vec<T> = diagonalize(&m)?.iter().map(|p| p.omega).collect();
        self.cache.push((omega_c, freqs));
        Ok(&self.cache.last().unwrap().1)
    }
}

fn predicted_frequency<T: Real>(freqs: &[T], point: &BranchPoint<T>) -> Result<T> {
    match point.branch_hint {
        Some(b) => freqs.get(b).copied().ok_or_else(|| {
            Error::domain(format!(
                "branch hint {b} out of range ({} branches predicted)",
                freqs.len()
            ))
        }),
        None => {
            let mut best = freqs[0];
            let mut best_d = (freqs[0] - point.omega_meas).abs();
            for &f in &freqs[1..] {
                let d = (f - point.omega_meas).abs();
                if d < best_d {
                    best_d = d;
                    best = f;
                }
            }
            Ok(best)
        }
    }
}

fn weighted_rms<T: Real>(eval: &mut BranchEval<T>, points: &[BranchPoint<T>]) -> Result<T> {
    let mut acc = T::zero();
    let mut wsum = T::zero();
    for p in points {
        let freqs = eval.frequencies(p.omega_c)?;
        let e = predicted_frequency(freqs, p)? - p.omega_meas;
        acc += p.weight * e * e;
        wsum += p.weight;
    }
    if !(wsum > T::zero()) {
        return Err(Error::domain("total weight of branch points is zero"));
    }
    Ok((acc / wsum).sqrt())
}

fn validate_fit_inputs<T: Real>(nu: &[T], omegas: &[T], points: &[BranchPoint<T>]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::domain("no branch points supplied"));
    }
    if nu.len() != omegas.len() {
        return Err(Error::domain(format!(
            "candidate nu has {} entries but {} phonon frequencies were fixed",
            nu.len(),
            omegas.len()
        )));
    }
    for &n in nu {
        if !(n >= T::zero()) {
            return Err(Error::domain(format!("candidate nu must be >= 0, got {n}")));
        }
    }
    for p in points {
        p.validate()?;
    }
    Ok(())
}

/// Weighted rms frequency error of candidate plasma frequencies against the
/// measured points.
pub fn residual<T: Real>(
    nu_candidate: &[T],
    fixed_omegas: &[T],
    points: &[BranchPoint<T>],
) -> Result<T> {
    validate_fit_inputs(nu_candidate, fixed_omegas, points)?;
    let mut eval = BranchEval::new(fixed_omegas, nu_candidate)?;
    weighted_rms(&mut eval, points)
}

/// Signed per-point errors at the given parameters (same assignment rule as
/// [`residual`]).
pub fn per_point_residuals<T: Real>(
    nu: &[T],
    fixed_omegas: &[T],
    points: &[BranchPoint<T>],
) -> Result<Vec<T>> {
    validate_fit_inputs(nu, fixed_omegas, points)?;
    let mut eval = BranchEval::new(fixed_omegas, nu)?;
    points
        .iter()
        .map(|p| Ok(predicted_frequency(eval.frequencies(p.omega_c)?, p)? - p.omega_meas))
        .collect()
}

/// Quadratic-interpolation minimum of three samples; `None` when the
/// abscissae are degenerate or the parabola has no interior minimum.
fn parabola_vertex<T: Real>(x: [T; 3], f: [T; 3]) -> Option<T> {
    let den = (x[1] - x[0]) * (f[1] - f[2]) - (x[1] - x[2]) * (f[1] - f[0]);
    if den == T::zero() {
        return None;
    }
    let num = (x[1] - x[0]) * (x[1] - x[0]) * (f[1] - f[2])
        - (x[1] - x[2]) * (x[1] - x[2]) * (f[1] - f[0]);
    Some(x[1] - lit::<T>(0.5) * num / den)
}

/// Fit the plasma frequencies `nu` to the measured branch points, holding
/// the phonon frequencies fixed.
///
/// `fixed_modes` supplies the frequencies and labels; its `nu` entries are
/// ignored. Returns the best parameters found even when the pass limit is
/// hit (`converged = false` in that case).
pub fn fit_couplings<T: Real>(
    points: &[BranchPoint<T>],
    fixed_modes: &[PhononMode<T>],
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    let n = fixed_modes.len();
    if n == 0 {
        return Err(Error::domain("no phonon modes to fit"));
    }
    for m in fixed_modes {
        m.validate()?;
    }
    if points.len() < n {
        return Err(Error::UnderDetermined { points: points.len(), params: n });
    }
    for p in points {
        p.validate()?;
    }
    let omegas: Vec<T> = fixed_modes.iter().map(|m| m.omega).collect();
    let max_omega = omegas.iter().copied().fold(T::zero(), T::max);
    let nu_max = options.nu_max.unwrap_or(lit::<T>(2.0) * max_omega);

    // --- coarse logarithmic grid over nu/omega ---
    let mut steps = options.coarse_steps.max(2);
    while steps > 3 && (steps as f64).powi(n as i32) > options.max_coarse_evals as f64 {
        steps -= 1;
    }
    let ratio = |i: usize| -> T {
        let t = i as f64 / (steps - 1) as f64;
        let lo = options.coarse_ratio_lo.to_f64().unwrap_or(0.05);
        let hi = options.coarse_ratio_hi.to_f64().unwrap_or(1.0);
        lit::<T>(lo * (hi / lo).powf(t))
    };
    let stride = points.len().div_ceil(options.decimate_to.max(1));
    let coarse_points: Vec<BranchPoint<T>> = points.iter().step_by(stride).cloned().collect();

    let mut combo = vec![0usize; n];
    let mut best_nu: Vec<T> = Vec::new();
    let mut best_r = T::infinity();
    loop {
        let nu: Vec<T> =
            combo.iter().zip(&omegas).map(|(&i, &w)| (ratio(i) * w).min(nu_max)).collect();
        let r = residual(&nu, &omegas, &coarse_points)?;
        if r < best_r {
            best_r = r;
            best_nu = nu;
        }
        // odometer over the n-dimensional grid
        let mut k = 0;
        loop {
            if k == n {
                break;
            }
            combo[k] += 1;
            if combo[k] < steps {
                break;
            }
            combo[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }

    // --- coordinate-wise quadratic refinement with adaptive steps ---
    let mut nu = best_nu;
    let mut h: Vec<T> = omegas.iter().map(|&w| lit::<T>(0.1) * w).collect();
    let h_floor = lit::<T>(1e-12);
    let h_stop = lit::<T>(1e-7).max(T::epsilon() * lit(100.0));
    let mut r_cur = residual(&nu, &omegas, points)?;
    let mut history = vec![r_cur];
    let mut passes = 0usize;
    let mut converged = false;
    while passes < options.max_passes {
        passes += 1;
        let r_pass_start = r_cur;
        for j in 0..n {
            let lo = (nu[j] - h[j]).max(T::zero());
            let hi = (nu[j] + h[j]).min(nu_max);
            let xs = [lo, nu[j], hi];
            let mut trial = nu.clone();
            let mut fs = [T::zero(); 3];
            for (s, &x) in xs.iter().enumerate() {
                trial[j] = x;
                fs[s] = residual(&trial, &omegas, points)?;
            }
            let mut cand: Vec<(T, T)> = xs.iter().copied().zip(fs.iter().copied()).collect();
            if let Some(xv) = parabola_vertex(xs, fs) {
                if xv > lo && xv < hi {
                    trial[j] = xv;
                    cand.push((xv, residual(&trial, &omegas, points)?));
                }
            }
            let (bx, br) = cand
                .iter()
                .copied()
                .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite residuals"))
                .unwrap();
            if br < r_cur {
                let moved = (bx - nu[j]).abs();
                nu[j] = bx;
                r_cur = br;
                h[j] = if moved > lit::<T>(0.7) * h[j] {
                    (h[j] + h[j]).min(lit::<T>(0.5) * omegas[j])
                } else {
                    (h[j] * lit::<T>(0.5)).max(h_floor)
                };
            } else {
                h[j] = (h[j] * lit::<T>(0.25)).max(h_floor);
            }
        }
        history.push(r_cur);
        let h_max = h.iter().copied().fold(T::zero(), T::max);
        if r_pass_start - r_cur < options.tol && h_max < h_stop {
            converged = true;
            break;
        }
    }

    let per_point = per_point_residuals(&nu, &omegas, points)?;
    let normalized: Vec<T> =
        nu.iter().zip(&omegas).map(|(&n, &w)| n / (lit::<T>(2.0) * w)).collect();
    Ok(FitResult {
        labels: fixed_modes.iter().map(|m| m.label.clone()).collect(),
        omegas,
        nu,
        normalized_couplings: normalized,
        rms_residual: r_cur,
        per_point_residuals: per_point,
        iterations: passes,
        converged,
        residual_history: history,
    })
}

/// Per-mode change of one coupling between the two phases, in both
/// conventions: the normalized coupling g/omega and the plasma frequency nu.
/// The two differ whenever the mode frequency itself shifts across the
/// transition.
#[derive(Debug, Clone)]
pub struct ModeChange<T: Real> {
    pub label: String,
    pub g_over_omega_high: T,
    pub g_over_omega_low: T,
    pub g_over_omega_rel_change: T,
    pub nu_high: T,
    pub nu_low: T,
    pub nu_rel_change: T,
}

/// Report comparing fitted couplings of the high-temperature phase against
/// the low-temperature phase.
#[derive(Debug, Clone)]
pub struct PhaseComparison<T: Real> {
    /// Modes present in both fits, in the high-phase label order.
    pub changes: Vec<ModeChange<T>>,
    /// Labels only present in the high-temperature fit.
    pub only_high: Vec<String>,
    /// Labels only present in the low-temperature fit (emergent modes).
    pub only_low: Vec<String>,
}

/// Compare two converged fits mode-by-mode (matched by label).
pub fn compare_phases<T: Real>(
    fit_high: &FitResult<T>,
    fit_low: &FitResult<T>,
) -> Result<PhaseComparison<T>> {
    if !fit_high.converged || !fit_low.converged {
        return Err(Error::domain(
            "compare_phases requires both fits to have converged",
        ));
    }
    let mut changes = Vec::new();
    let mut only_high = Vec::new();
    for (i, label) in fit_high.labels.iter().enumerate() {
        match fit_low.labels.iter().position(|l| l == label) {
            Some(j) => {
                let gh = fit_high.normalized_couplings[i];
                let gl = fit_low.normalized_couplings[j];
                let nh = fit_high.nu[i];
                let nl = fit_low.nu[j];
                changes.push(ModeChange {
                    label: label.clone(),
                    g_over_omega_high: gh,
                    g_over_omega_low: gl,
                    g_over_omega_rel_change: (gl - gh) / gh,
                    nu_high: nh,
                    nu_low: nl,
                    nu_rel_change: (nl - nh) / nh,
                });
            }
            None => only_high.push(label.clone()),
        }
    }
    let only_low: Vec<String> = fit_low
        .labels
        .iter()
        .filter(|l| !fit_high.labels.contains(l))
        .cloned()
        .collect();
    if changes.is_empty() {
        return Err(Error::domain(
            "mode labeling mismatch: the two fits share no mode labels",
        ));
    }
    Ok(PhaseComparison { changes, only_high, only_low })
}

impl<T: Real> std::fmt::Display for PhaseComparison<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "coupling change upon cooling (high -> low phase):")?;
        for c in &self.changes {
            writeln!(
                f,
                "  {}: g/omega {:.4} -> {:.4} ({:+.1}%), nu {:.4} -> {:.4} THz ({:+.1}%)",
                c.label,
                c.g_over_omega_high.to_f64().unwrap_or(f64::NAN),
                c.g_over_omega_low.to_f64().unwrap_or(f64::NAN),
                100.0 * c.g_over_omega_rel_change.to_f64().unwrap_or(f64::NAN),
                c.nu_high.to_f64().unwrap_or(f64::NAN),
                c.nu_low.to_f64().unwrap_or(f64::NAN),
                100.0 * c.nu_rel_change.to_f64().unwrap_or(f64::NAN),
            )?;
        }
        for l in &self.only_low {
            writeln!(f, "  {l}: emergent in the low-temperature phase")?;
        }
        for l in &self.only_high {
            writeln!(f, "  {l}: absent from the low-temperature fit")?;
        }
        Ok(())
    }
}
