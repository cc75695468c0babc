//! Polariton dispersions over cavity-frequency and temperature grids, plus
//! the secular-equation root finder used as an independent cross-check on
//! the matrix diagonalization.
//!
//! The positive polariton frequencies solve the secular equation
//!
//! ```text
//! Omega^2 (1 - sum_k nu_k^2 / (Omega^2 - w_k^2)) = w_c^2
//! ```
//!
//! whose polynomial form in `u = Omega^2` is monic of degree N+1. The sum
//! and product of its roots give the exact rules
//! `sum Omega^2 = w_c^2 + sum (w_k^2 + nu_k^2)` and
//! `prod Omega^2 = w_c^2 prod w_k^2`. [`secular_roots`] brackets each root
//! between consecutive poles `w_k^2` of the rational form and bisects; it
//! shares no code with the eigensolver in [`crate::hopfield`].

use crate::error::{Error, Result};
use crate::hopfield::{build_dynamical_matrix, diagonalize, PolaritonMode};
use crate::model::{mode_set_at, MaterialModel, Phase, PhononMode};
use crate::{lit, Real};

/// Polariton branches and fractions over a cavity-frequency grid.
///
/// `points[i]` holds the N+1 modes at `omega_c_grid[i]` in ascending
/// frequency order; `labels[i][j]` is the connectivity label of branch `j`
/// at grid point `i` (labels follow eigenvector overlap across the grid,
/// see [`connect_branches`]). `ambiguous_steps` lists the grid intervals
/// where overlap matching was inconclusive and the nearest-frequency
/// fallback was used.
#[derive(Debug, Clone)]
pub struct DispersionMap<T: Real> {
    pub omega_c_grid: Vec<T>,
    pub points: Vec<Vec<PolaritonMode<T>>>,
    pub labels: Vec<Vec<usize>>,
    pub ambiguous_steps: Vec<usize>,
    /// Labels of the phonon modes, for column naming in exports.
    pub mode_labels: Vec<String>,
}

impl<T: Real> DispersionMap<T> {
    /// Number of branches per grid point (N + 1).
    pub fn branch_count(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Branch frequencies at grid point `i`, ascending.
    pub fn frequencies_at(&self, i: usize) -> Vec<T> {
        self.points[i].iter().map(|p| p.omega).collect()
    }
}

/// Branch frequencies versus temperature at fixed cavity frequency.
#[derive(Debug, Clone)]
pub struct TemperatureScan<T: Real> {
    pub t_grid: Vec<T>,
    pub omega_c: T,
    /// Ascending branch frequencies for each temperature.
    pub branch_table: Vec<Vec<T>>,
    pub phase_labels: Vec<Phase>,
}

/// A temperature-grid index where the branch count changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangePoint<T: Real> {
    /// Index of the first grid point with the new count.
    pub index: usize,
    /// Temperature of that grid point, K.
    pub t: T,
    pub count_before: usize,
    pub count_after: usize,
}

impl<T: Real> TemperatureScan<T> {
    /// Grid points where the number of branches changes.
    pub fn change_points(&self) -> Vec<ChangePoint<T>> {
        let mut out = Vec::new();
        for i in 1..self.branch_table.len() {
            let before = self.branch_table[i - 1].len();
            let after = self.branch_table[i].len();
            if before != after {
                out.push(ChangePoint {
                    index: i,
                    t: self.t_grid[i],
                    count_before: before,
                    count_after: after,
                });
            }
        }
        out
    }
}

fn check_grid<T: Real>(name: &str, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain(format!("{name} grid is empty")));
    }
    for (i, &x) in grid.iter().enumerate() {
        if !(x > T::zero()) {
            return Err(Error::domain(format!("{name} grid entry {i} must be > 0, got {x}")));
        }
        if i > 0 && !(x > grid[i - 1]) {
            return Err(Error::domain(format!(
                "{name} grid must be strictly increasing (entry {i}: {} then {x})",
                grid[i - 1]
            )));
        }
    }
    Ok(())
}

fn with_grid_context<T: Real>(index: usize, omega_c: T, err: Error) -> Error {
    let ctx = format!("at grid point {index} (omega_c = {omega_c}): ");
    match err {
        Error::Domain(m) => Error::Domain(format!("{ctx}{m}")),
        Error::Instability(m) => Error::Instability(format!("{ctx}{m}")),
        Error::Numerical(m) => Error::Numerical(format!("{ctx}{m}")),
        other => other,
    }
}

/// Diagonalize at every grid point and attach connectivity labels.
pub fn sweep<T: Real>(modes: &[PhononMode<T>], omega_c_grid: &[T]) -> Result<DispersionMap<T>> {
    check_grid("omega_c", omega_c_grid)?;
    let mut points = Vec::with_capacity(omega_c_grid.len());
    for (i, &wc) in omega_c_grid.iter().enumerate() {
        let m = build_dynamical_matrix(wc, modes).map_err(|e| with_grid_context(i, wc, e))?;
        let p = diagonalize(&m).map_err(|e| with_grid_context(i, wc, e))?;
        points.push(p);
    }
    let map = DispersionMap {
        omega_c_grid: omega_c_grid.to_vec(),
        points,
        labels: Vec::new(),
        ambiguous_steps: Vec::new(),
        mode_labels: modes.iter().map(|m| m.label.clone()).collect(),
    };
    Ok(connect_branches(map))
}

/// Bogoliubov-metric overlap |<c1, S c2>| with S = diag(+1, -1) on the
/// (annihilation, creation) blocks; 1 for identical normalized modes.
fn bogoliubov_overlap<T: Real>(a: &PolaritonMode<T>, b: &PolaritonMode<T>) -> T {
    let mut acc = a.w.conj() * b.w - a.y.conj() * b.y;
    for (xa, xb) in a.x.iter().zip(&b.x) {
        acc = acc + xa.conj() * *xb;
    }
    for (za, zb) in a.z.iter().zip(&b.z) {
        acc = acc - za.conj() * *zb;
    }
    acc.norm_sqr().sqrt()
}

/// Assign stable branch labels across the grid by maximizing eigenvector
/// overlap between adjacent points; fall back to nearest-frequency (index)
/// matching whenever the best overlap for some branch drops below 0.5.
pub fn connect_branches<T: Real>(mut map: DispersionMap<T>) -> DispersionMap<T> {
    let threshold = lit::<T>(0.5);
    let npts = map.points.len();
    map.labels.clear();
    map.ambiguous_steps.clear();
    if npts == 0 {
        return map;
    }
    let nb = map.points[0].len();
    map.labels.push((0..nb).collect());
    for i in 1..npts {
        let prev = &map.points[i - 1];
        let cur = &map.points[i];
        // greedy max-overlap assignment, deterministic scan order
        let mut overlap = vec![vec![T::zero(); nb]; nb];
        for (j, pj) in prev.iter().enumerate() {
            for (k, ck) in cur.iter().enumerate() {
                overlap[j][k] = bogoliubov_overlap(pj, ck);
            }
        }
        let mut assigned_prev = vec![false; nb];
        let mut assigned_cur = vec![false; nb];
        let mut assignment = vec![usize::MAX; nb]; // cur index -> prev index
        let mut min_overlap = T::infinity();
        for _ in 0..nb {
            let mut best = T::neg_infinity();
            let mut best_jk = (0, 0);
            for j in 0..nb {
                if assigned_prev[j] {
                    continue;
                }
                for k in 0..nb {
                    if assigned_cur[k] {
                        continue;
                    }
                    if overlap[j][k] > best {
                        best = overlap[j][k];
                        best_jk = (j, k);
                    }
                }
            }
            assigned_prev[best_jk.0] = true;
            assigned_cur[best_jk.1] = true;
            assignment[best_jk.1] = best_jk.0;
            min_overlap = min_overlap.min(best);
        }
        let prev_labels = map.labels[i - 1].clone();
        let labels = if min_overlap < threshold {
            map.ambiguous_steps.push(i);
            // nearest-frequency fallback: both lists ascending, match by rank
            prev_labels
        } else {
            (0..nb).map(|k| prev_labels[assignment[k]]).collect()
        };
        map.labels.push(labels);
    }
    map
}

/// Positive roots of the secular equation, ascending, by pole-bracketed
/// bisection on the rational form. Computes the same N+1 frequencies as
/// [`diagonalize`] through an algebraically independent route.
pub fn secular_roots<T: Real>(modes: &[PhononMode<T>], omega_c: T) -> Result<Vec<T>> {
    if !(omega_c > T::zero()) {
        return Err(Error::domain(format!("secular_roots: omega_c must be > 0, got {omega_c}")));
    }
    for m in modes {
        m.validate()?;
    }

    // Exact roots: nu = 0 modes decouple at their bare frequency; repeated
    // coupled frequencies leave dark combinations pinned at the pole.
    let mut exact_u: Vec<T> = Vec::new();
    // Poles of the rational form: (omega^2, summed nu^2) per distinct
    // coupled frequency.
    let mut poles: Vec<(T, T)> = Vec::new();
    for m in modes {
        let p = m.omega * m.omega;
        if m.nu == T::zero() {
            exact_u.push(p);
            continue;
        }
        match poles.iter_mut().find(|(q, _)| *q == p) {
            Some((_, s)) => {
                *s += m.nu * m.nu;
                exact_u.push(p);
            }
            None => poles.push((p, m.nu * m.nu)),
        }
    }
    poles.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite poles"));

    let wc2 = omega_c * omega_c;
    let f = |u: T| -> T {
        let mut s = T::zero();
        for &(p, nu2) in &poles {
            s += nu2 / (u - p);
        }
        u * (T::one() - s) - wc2
    };

    // The sum rule bounds every root from above.
    let sum_bound =
        wc2 + modes.iter().map(|m| m.omega * m.omega + m.nu * m.nu).sum::<T>();
    let u_hi = sum_bound + T::one();
    if !(f(u_hi) >= T::zero()) {
        return Err(Error::Numerical(format!(
            "secular_roots: upper bracket failed, f({u_hi}) = {} < 0",
            f(u_hi)
        )));
    }

    // One root per bracket; the sign of f is known to be negative at the
    // low end and positive at the high end of every bracket, so bisection
    // never needs to evaluate at the (possibly singular) endpoints.
    let mut brackets: Vec<(T, T)> = Vec::with_capacity(poles.len() + 1);
    if poles.is_empty() {
        brackets.push((T::zero(), u_hi));
    } else {
        brackets.push((T::zero(), poles[0].0));
        for i in 1..poles.len() {
            brackets.push((poles[i - 1].0, poles[i].0));
        }
        brackets.push((poles[poles.len() - 1].0, u_hi));
    }

    let abs_tol = lit::<T>(1e-12);
    let mut roots_u = exact_u;
    for (mut lo, mut hi) in brackets {
        let mut iter = 0usize;
        loop {
            let mut mid = (lo + hi) * lit::<T>(0.5);
            let mut fm = f(mid);
            if !fm.is_finite() {
                // mid landed exactly on a pole; nudge toward the high end
                mid = mid + (hi - lo) * lit::<T>(1e-3);
                fm = f(mid);
                if !fm.is_finite() {
                    return Err(Error::Numerical(format!(
                        "secular_roots: cannot evaluate rational form inside bracket \
                         [{lo}, {hi}]"
                    )));
                }
            }
            if fm >= T::zero() {
                hi = mid;
            } else {
                lo = mid;
            }
            let width = hi - lo;
            if width <= abs_tol.max(T::epsilon() * lit::<T>(4.0) * mid.abs()) {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::Numerical(format!(
                    "secular_roots: bisection failed to converge in bracket \
                     [{lo}, {hi}] (width {width})"
                )));
            }
        }
        roots_u.push((lo + hi) * lit::<T>(0.5));
    }

    roots_u.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    if roots_u.len() != modes.len() + 1 {
        return Err(Error::Numerical(format!(
            "secular_roots: found {} roots, expected {}",
            roots_u.len(),
            modes.len() + 1
        )));
    }
    Ok(roots_u.into_iter().map(T::sqrt).collect())
}

/// Diagonalize the active mode set at every temperature of `t_grid`.
pub fn scan_temperature<T: Real>(
    material: &MaterialModel<T>,
    omega_c: T,
    t_grid: &[T],
) -> Result<TemperatureScan<T>> {
    check_grid("temperature", t_grid)?;
    let mut branch_table = Vec::with_capacity(t_grid.len());
    let mut phase_labels = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let modes = mode_set_at(material, t)?;
        let m = build_dynamical_matrix(omega_c, modes)?;
        let polaritons = diagonalize(&m)?;
        branch_table.push(polaritons.iter().map(|p| p.omega).collect());
        phase_labels.push(material.phase_at(t));
    }
    Ok(TemperatureScan { t_grid: t_grid.to_vec(), omega_c, branch_table, phase_labels })
}

/// Convenience: `sum_alpha Omega_alpha^2` must equal
/// `w_c^2 + sum_k (w_k^2 + nu_k^2)` (used by tests and diagnostics).
pub fn sum_rule_rhs<T: Real>(omega_c: T, modes: &[PhononMode<T>]) -> T {
    omega_c * omega_c
        + modes.iter().map(|m| m.omega * m.omega + m.nu * m.nu).sum::<T>()
}

/// Convenience: `prod_alpha Omega_alpha^2 = w_c^2 prod_k w_k^2`.
pub fn product_rule_rhs<T: Real>(omega_c: T, modes: &[PhononMode<T>]) -> T {
    modes.iter().fold(omega_c * omega_c, |acc, m| acc * m.omega * m.omega)
}
