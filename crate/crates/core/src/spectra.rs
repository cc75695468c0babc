//! Classical damped transmittance synthesis and peak extraction.
//!
//! The coupled cavity-phonon response uses the damped extension of the
//! secular equation,
//!
//! ```text
//! D(w) = w^2 + i kappa w - w_c^2 - sum_k nu_k^2 w^2 / (w^2 - w_k^2 + i gamma_k w)
//! ```
//!
//! whose zeros in the zero-damping limit are exactly the polariton
//! frequencies, so peaks of the normalized transmittance `|1/D|^2` converge
//! to the eigenfrequencies as the linewidths shrink. The bare-film response
//! is the standard thin-film transmission of a Lorentz dielectric. Together
//! with [`extract_peaks`] these close the loop synthetic map -> branch
//! points -> coupling fit.

use crate::error::{Error, Result};
use crate::fit::BranchPoint;
use crate::model::PhononMode;
use crate::{lit, Real};
use num_complex::Complex;

/// Speed of light in nm * THz.
const C_NM_THZ: f64 = 299_792.458;

/// Cavity and phonon linewidths for the coupled response.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingSet<T: Real> {
    /// Cavity linewidth kappa, THz.
    pub kappa: T,
    /// One phonon linewidth per mode, THz.
    pub gammas: Vec<T>,
}

impl<T: Real> DampingSet<T> {
    pub fn new(kappa: T, gammas: Vec<T>) -> Result<Self> {
        let d = DampingSet { kappa, gammas };
        d.validate()?;
        Ok(d)
    }

    /// Same linewidth for every phonon mode.
    pub fn uniform(kappa: T, gamma: T, n_modes: usize) -> Result<Self> {
        Self::new(kappa, vec![gamma; n_modes])
    }

    /// Take the per-mode linewidths from the mode set itself.
    pub fn from_modes(kappa: T, modes: &[PhononMode<T>]) -> Result<Self> {
        Self::new(kappa, modes.iter().map(|m| m.gamma).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= T::zero()) {
            return Err(Error::domain(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        for (i, &g) in self.gammas.iter().enumerate() {
            if !(g >= T::zero()) {
                return Err(Error::domain(format!("gamma[{i}] must be >= 0, got {g}")));
            }
        }
        Ok(())
    }

    fn all_zero(&self) -> bool {
        self.kappa == T::zero() && self.gammas.iter().all(|&g| g == T::zero())
    }
}

/// Metadata carried along with a synthesized spectrum.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpectrumMeta<T: Real> {
    pub omega_c: Option<T>,
    pub temperature: Option<T>,
    pub kappa: Option<T>,
    /// Set when the thin-film approximation was used outside its validity
    /// range (thickness above a tenth of the shortest wavelength).
    pub thin_film_warning: bool,
}

/// A single normalized transmittance spectrum on an increasing frequency
/// grid; the maximum value is exactly 1.
#[derive(Debug, Clone)]
pub struct Spectrum<T: Real> {
    pub omega_grid: Vec<T>,
    pub transmittance: Vec<T>,
    pub meta: SpectrumMeta<T>,
}

/// Normalized transmittance over an (omega, omega_c) grid; one normalized
/// column per cavity frequency.
#[derive(Debug, Clone)]
pub struct TransmittanceMap<T: Real> {
    pub omega_c_grid: Vec<T>,
    pub omega_grid: Vec<T>,
    /// `columns[i][j]` = transmittance at `omega_c_grid[i]`, `omega_grid[j]`.
    pub columns: Vec<Vec<T>>,
}

fn check_omega_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::domain("frequency grid needs at least two points"));
    }
    for (i, &x) in grid.iter().enumerate() {
        if !(x > T::zero()) {
            return Err(Error::domain(format!("frequency grid entry {i} must be > 0, got {x}")));
        }
        if i > 0 && !(x > grid[i - 1]) {
            return Err(Error::domain("frequency grid must be strictly increasing"));
        }
    }
    Ok(())
}

fn normalize<T: Real>(values: &mut [T]) {
    let max = values.iter().copied().fold(T::zero(), T::max);
    if max > T::zero() {
        for v in values.iter_mut() {
            *v = *v / max;
        }
    }
}

/// Normalized coupled-response transmittance `|1/D(w)|^2`.
///
/// Requires at least one nonzero damping; in the limit of vanishing
/// linewidths the peak positions converge to the secular-equation roots.
pub fn coupled_transmittance<T: Real>(
    modes: &[PhononMode<T>],
    omega_c: T,
    damping: &DampingSet<T>,
    omega_grid: &[T],
) -> Result<Spectrum<T>> {
    if !(omega_c > T::zero()) {
        return Err(Error::domain(format!("omega_c must be > 0, got {omega_c}")));
    }
    for m in modes {
        m.validate()?;
    }
    check_omega_grid(omega_grid)?;
    damping.validate()?;
    if damping.gammas.len() != modes.len() {
        return Err(Error::domain(format!(
            "damping set has {} gammas for {} modes",
            damping.gammas.len(),
            modes.len()
        )));
    }
    if damping.all_zero() {
        return Err(Error::domain(
            "all dampings are zero: the response has no finite peaks",
        ));
    }

    let wc2 = omega_c * omega_c;
    let mut t: Vec<T> = omega_grid
        .iter()
        .map(|&w| {
            let w2 = w * w;
            let mut d = Complex::new(w2 - wc2, damping.kappa * w);
            for (m, &g) in modes.iter().zip(&damping.gammas) {
                let den = Complex::new(w2 - m.omega * m.omega, g * w);
                d = d - Complex::new(m.nu * m.nu * w2, T::zero()) / den;
            }
            // |D| can hit an exact zero on undamped branches; clamp so the
            // normalized spectrum stays finite with the peak pinned there.
            T::one() / d.norm_sqr().max(T::min_positive_value())
        })
        .collect();
    normalize(&mut t);
    Ok(Spectrum {
        omega_grid: omega_grid.to_vec(),
        transmittance: t,
        meta: SpectrumMeta {
            omega_c: Some(omega_c),
            kappa: Some(damping.kappa),
            ..Default::default()
        },
    })
}

/// Normalized transmittance of a bare thin film with a Lorentz dielectric
/// `eps(w) = eps_inf + sum_k nu_k^2 / (w_k^2 - w^2 - i gamma_k w)` on a
/// substrate of refractive index `substrate_index`:
/// `t = (1 + n_s) / (1 + n_s - i phi (eps - 1))` with the thin-film phase
/// `phi = 2 pi w d / c`. Dips sit at the bare phonon frequencies.
pub fn bare_film_transmittance<T: Real>(
    modes: &[PhononMode<T>],
    eps_inf: T,
    thickness_nm: T,
    substrate_index: T,
    omega_grid: &[T],
) -> Result<Spectrum<T>> {
    if !(eps_inf > T::zero()) || !(thickness_nm > T::zero()) || !(substrate_index > T::zero()) {
        return Err(Error::domain(format!(
            "bare_film_transmittance requires positive eps_inf, thickness and substrate index \
             (got {eps_inf}, {thickness_nm} nm, {substrate_index})"
        )));
    }
    for m in modes {
        m.validate()?;
    }
    check_omega_grid(omega_grid)?;

    let omega_max = *omega_grid.last().expect("non-empty grid");
    let lambda_min_nm = lit::<T>(C_NM_THZ) / omega_max;
    let warning = thickness_nm > lambda_min_nm / lit(10.0);

    let ns1 = substrate_index + T::one();
    let mut t: Vec<T> = omega_grid
        .iter()
        .map(|&w| {
            let mut eps = Complex::new(eps_inf, T::zero());
            for m in modes {
                let den = Complex::new(m.omega * m.omega - w * w, -(m.gamma * w));
                eps = eps + Complex::new(m.nu * m.nu, T::zero()) / den;
            }
            let phi = lit::<T>(2.0 * std::f64::consts::PI) * w * thickness_nm / lit(C_NM_THZ);
            let den = Complex::new(ns1, T::zero())
                - Complex::new(T::zero(), phi) * (eps - Complex::new(T::one(), T::zero()));
            let amp = Complex::new(ns1, T::zero()) / den;
            amp.norm_sqr()
        })
        .collect();
    normalize(&mut t);
    Ok(Spectrum {
        omega_grid: omega_grid.to_vec(),
        transmittance: t,
        meta: SpectrumMeta { thin_film_warning: warning, ..Default::default() },
    })
}

/// Topographic prominence of the local maximum at `i`: height above the
/// higher of the two valley floors reached before a taller sample.
fn prominence<T: Real>(values: &[T], i: usize) -> T {
    let peak = values[i];
    let mut left = peak;
    for j in (0..i).rev() {
        if values[j] > peak {
            break;
        }
        left = left.min(values[j]);
    }
    let mut right = peak;
    for &v in &values[i + 1..] {
        if v > peak {
            break;
        }
        right = right.min(v);
    }
    peak - left.max(right)
}

/// Vertex abscissa of the parabola through three points (general spacing).
fn parabola_peak<T: Real>(x: [T; 3], y: [T; 3]) -> Option<T> {
    let den = (x[1] - x[0]) * (y[1] - y[2]) - (x[1] - x[2]) * (y[1] - y[0]);
    if den == T::zero() {
        return None;
    }
    let num = (x[1] - x[0]) * (x[1] - x[0]) * (y[1] - y[2])
        - (x[1] - x[2]) * (x[1] - x[2]) * (y[1] - y[0]);
    Some(x[1] - lit::<T>(0.5) * num / den)
}

fn peaks_of<T: Real>(omega: &[T], values: &[T], min_prominence: T) -> Vec<T> {
    let mut out = Vec::new();
    if values.len() < 3 {
        return out;
    }
    for i in 1..values.len() - 1 {
        if values[i] > values[i - 1]
            && values[i] > values[i + 1]
            && prominence(values, i) >= min_prominence
        {
            let refined = parabola_peak(
                [omega[i - 1], omega[i], omega[i + 1]],
                [values[i - 1], values[i], values[i + 1]],
            )
            .filter(|&x| x > omega[i - 1] && x < omega[i + 1])
            .unwrap_or(omega[i]);
            out.push(refined);
        }
    }
    out
}

/// Local maxima with at least `min_prominence` (on the normalized 0..1
/// scale), refined by 3-point parabolic interpolation; ascending order.
pub fn extract_peaks<T: Real>(spectrum: &Spectrum<T>, min_prominence: T) -> Result<Vec<T>> {
    if !(min_prominence > T::zero()) || !(min_prominence < T::one()) {
        return Err(Error::domain(format!(
            "min_prominence must lie in (0, 1), got {min_prominence}"
        )));
    }
    if spectrum.omega_grid.len() != spectrum.transmittance.len() {
        return Err(Error::domain(format!(
            "spectrum grids disagree: {} frequencies, {} values",
            spectrum.omega_grid.len(),
            spectrum.transmittance.len()
        )));
    }
    Ok(peaks_of(&spectrum.omega_grid, &spectrum.transmittance, min_prominence))
}

/// Synthesize a normalized transmittance map column by column.
pub fn transmittance_map<T: Real>(
    modes: &[PhononMode<T>],
    damping: &DampingSet<T>,
    omega_c_grid: &[T],
    omega_grid: &[T],
) -> Result<TransmittanceMap<T>> {
    if omega_c_grid.is_empty() {
        return Err(Error::domain("omega_c grid is empty"));
    }
    for (i, &wc) in omega_c_grid.iter().enumerate() {
        if !(wc > T::zero()) {
            return Err(Error::domain(format!("omega_c grid entry {i} must be > 0, got {wc}")));
        }
        if i > 0 && !(wc > omega_c_grid[i - 1]) {
            return Err(Error::domain("omega_c grid must be strictly increasing"));
        }
    }
    let mut columns = Vec::with_capacity(omega_c_grid.len());
    for &wc in omega_c_grid {
        columns.push(coupled_transmittance(modes, wc, damping, omega_grid)?.transmittance);
    }
    Ok(TransmittanceMap {
        omega_c_grid: omega_c_grid.to_vec(),
        omega_grid: omega_grid.to_vec(),
        columns,
    })
}

/// Peak ridges of a map as branch points ready for fitting.
pub fn map_to_branch_points<T: Real>(
    map: &TransmittanceMap<T>,
    min_prominence: T,
) -> Result<Vec<BranchPoint<T>>> {
    if !(min_prominence > T::zero()) || !(min_prominence < T::one()) {
        return Err(Error::domain(format!(
            "min_prominence must lie in (0, 1), got {min_prominence}"
        )));
    }
    let mut points = Vec::new();
    for (col, &wc) in map.omega_c_grid.iter().enumerate() {
        let values = &map.columns[col];
        if values.len() != map.omega_grid.len() {
            return Err(Error::domain(format!(
                "map column {col} has {} values for {} frequencies",
                values.len(),
                map.omega_grid.len()
            )));
        }
        for peak in peaks_of(&map.omega_grid, values, min_prominence) {
            points.push(BranchPoint::new(wc, peak)?);
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::secular_roots;
    use crate::preset;

    fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
        let n = ((stop - start) / step).round() as usize;
        (0..=n).map(|i| start + step * i as f64).collect()
    }

    #[test]
    fn bare_cavity_single_peak() {
        let d = DampingSet::uniform(0.1, 0.05, 0).unwrap();
        let s = coupled_transmittance::<f64>(&[], 1.52, &d, &grid(0.2, 3.2, 0.005)).unwrap();
        let peaks = extract_peaks(&s, 0.05).unwrap();
        assert_eq!(peaks.len(), 1);
        // finite kappa pulls the Lorentzian peak to sqrt(wc^2 - kappa^2/2)
        let damped = (1.52f64.powi(2) - 0.1f64.powi(2) / 2.0).sqrt();
        assert!((peaks[0] - damped).abs() < 1e-4, "peak at {}", peaks[0]);
        assert!((peaks[0] - 1.52).abs() < 0.0025);
        let max = s.transmittance.iter().copied().fold(0.0, f64::max);
        assert_eq!(max, 1.0);
        assert!(s.transmittance.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn preset_peaks_converge_to_eigenfrequencies() {
        let material = preset::mapbi3::<f64>();
        let modes = &material.tetragonal_modes;
        let d = DampingSet::uniform(0.05, 0.05, modes.len()).unwrap();
        let s = coupled_transmittance(modes, 1.52, &d, &grid(0.2, 3.2, 0.002)).unwrap();
        let peaks = extract_peaks(&s, 0.02).unwrap();
        assert_eq!(peaks.len(), 3);
        let roots = secular_roots(modes, 1.52).unwrap();
        for (p, r) in peaks.iter().zip(&roots) {
            assert!((p - r).abs() < 0.025, "peak {p} vs root {r}");
        }
    }

    #[test]
    fn peak_eigenvalue_deviation_bounded_by_half_linewidth() {
        let material = preset::mapbi3::<f64>();
        for modes in [&material.tetragonal_modes, &material.orthorhombic_modes] {
            for (kappa, gamma) in [(0.1f64, 0.05), (0.04, 0.02)] {
                let d = DampingSet::uniform(kappa, gamma, modes.len()).unwrap();
                let bound = kappa.max(gamma) / 2.0;
                for wc in [0.8, 1.52, 2.4] {
                    let s = coupled_transmittance(modes, wc, &d, &grid(0.2, 3.4, 0.002)).unwrap();
                    let roots = secular_roots(modes, wc).unwrap();
                    for p in extract_peaks(&s, 0.02).unwrap() {
                        let dist =
                            roots.iter().map(|r| (r - p).abs()).fold(f64::INFINITY, f64::min);
                        assert!(dist <= bound, "peak {p} is {dist} from the nearest root");
                    }
                }
            }
        }
    }

    #[test]
    fn decoupled_modes_leave_cavity_peak() {
        let modes = [PhononMode::new("TO1", 1.0, 0.0, 0.0).unwrap()];
        let d = DampingSet::new(0.0, vec![0.08]).unwrap();
        let s = coupled_transmittance(&modes, 1.52, &d, &grid(0.2, 3.2, 0.005)).unwrap();
        let peaks = extract_peaks(&s, 0.05).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0] - 1.52).abs() < 5e-3);
    }

    #[test]
    fn zero_damping_rejected() {
        let modes = [PhononMode::new("TO1", 1.0, 0.3, 0.0).unwrap()];
        let d = DampingSet::new(0.0, vec![0.0]).unwrap();
        let err = coupled_transmittance(&modes, 1.0, &d, &grid(0.5, 1.5, 0.01)).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        assert!(DampingSet::new(-0.1, vec![0.0]).is_err());
    }

    #[test]
    fn film_dips_at_phonon_frequencies() {
        let material = preset::mapbi3::<f64>();
        let w = grid(0.2, 3.0, 0.002);
        for (modes, expect) in [
            (&material.tetragonal_modes, vec![0.95, 1.78]),
            (&material.orthorhombic_modes, vec![0.77, 0.98, 1.7]),
        ] {
            let s = bare_film_transmittance(modes, 5.0, 200.0, 2.13, &w).unwrap();
            assert!(!s.meta.thin_film_warning);
            // local minima of the spectrum
            let t = &s.transmittance;
            let minima: Vec<f64> = (1..t.len() - 1)
                .filter(|&i| t[i] < t[i - 1] && t[i] < t[i + 1])
                .map(|i| w[i])
                .collect();
            for e in &expect {
                let nearest =
                    minima.iter().map(|m| (m - e).abs()).fold(f64::INFINITY, f64::min);
                assert!(nearest < 0.025, "no dip near {e} (nearest {nearest})");
            }
        }
    }

    #[test]
    fn film_without_oscillators_is_flat() {
        let modes = [PhononMode::new("TO1", 1.0, 0.0, 0.05).unwrap()];
        // eps = eps_inf exactly; the tiny constant absorption-free offset
        // normalizes away only up to the (real) eps_inf - 1 phase term
        let s = bare_film_transmittance(&modes, 1.0, 200.0, 2.13, &grid(0.2, 3.0, 0.01)).unwrap();
        for &v in &s.transmittance {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn film_dip_deepens_with_oscillator_strength() {
        let w = grid(0.5, 1.5, 0.001);
        let mut last_depth = 0.0;
        for nu in [0.2, 0.4, 0.6, 0.8] {
            let modes = [PhononMode::new("TO1", 1.0, nu, 0.05).unwrap()];
            let s = bare_film_transmittance(&modes, 5.0, 200.0, 2.13, &w).unwrap();
            let min = s.transmittance.iter().copied().fold(f64::INFINITY, f64::min);
            let depth = 1.0 - min;
            assert!(depth > last_depth, "nu={nu}: depth {depth} <= {last_depth}");
            last_depth = depth;
        }
    }

    #[test]
    fn thick_film_sets_warning() {
        let modes = [PhononMode::new("TO1", 1.0, 0.3, 0.05).unwrap()];
        let s = bare_film_transmittance(&modes, 5.0, 50_000.0, 2.13, &grid(0.2, 3.0, 0.01))
            .unwrap();
        assert!(s.meta.thin_film_warning);
    }

    #[test]
    fn extract_peaks_edge_cases() {
        let flat = Spectrum {
            omega_grid: grid(0.2, 1.0, 0.01),
            transmittance: vec![1.0; 81],
            meta: SpectrumMeta::default(),
        };
        assert!(extract_peaks(&flat, 0.05).unwrap().is_empty());
        assert!(extract_peaks(&flat, 0.0).is_err());
        assert!(extract_peaks(&flat, 1.0).is_err());
    }

    #[test]
    fn map_points_cover_all_columns() {
        let material = preset::mapbi3::<f64>();
        let modes = &material.tetragonal_modes;
        let d = DampingSet::uniform(0.1, 0.05, modes.len()).unwrap();
        let wcs = grid(1.0, 2.0, 0.1);
        let map = transmittance_map(modes, &d, &wcs, &grid(0.2, 3.2, 0.005)).unwrap();
        let pts = map_to_branch_points(&map, 0.05).unwrap();
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(wcs.contains(&p.omega_c));
        }
    }
}
