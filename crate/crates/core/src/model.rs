//! Domain types, phase logic, and cavity calibration.
//!
//! Frequencies are ordinary frequencies in THz throughout (see the crate
//! docs for the unit convention). A phonon mode is one transverse-optical
//! oscillator; a material is a pair of phase-resolved mode sets separated by
//! the structural transition temperature `tc`.

use crate::error::{Error, Result};
use crate::{lit, Real};

/// One transverse-optical phonon oscillator.
///
/// `omega` is the mode frequency, `nu` the effective ionic plasma frequency
/// (the oscillator strength entering the light-matter coupling), and `gamma`
/// a linewidth used only by the classical transmittance synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononMode<T: Real> {
    pub label: String,
    pub omega: T,
    pub nu: T,
    pub gamma: T,
}

impl<T: Real> PhononMode<T> {
    pub fn new(label: impl Into<String>, omega: T, nu: T, gamma: T) -> Result<Self> {
        let mode = PhononMode { label: label.into(), omega, nu, gamma };
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > T::zero()) {
            return Err(Error::domain(format!(
                "phonon mode {:?}: omega must be > 0, got {}",
                self.label, self.omega
            )));
        }
        if !(self.nu >= T::zero()) {
            return Err(Error::domain(format!(
                "phonon mode {:?}: nu must be >= 0, got {}",
                self.label, self.nu
            )));
        }
        if !(self.gamma >= T::zero()) {
            return Err(Error::domain(format!(
                "phonon mode {:?}: gamma must be >= 0, got {}",
                self.label, self.gamma
            )));
        }
        Ok(())
    }

    /// Normalized coupling g/omega at cavity-phonon resonance, nu/(2 omega).
    pub fn normalized_coupling(&self) -> T {
        self.nu / (lit::<T>(2.0) * self.omega)
    }
}

/// Crystal phase of the material. `Tetragonal` is the high-temperature
/// phase, `Orthorhombic` the low-temperature one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Tetragonal,
    Orthorhombic,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Tetragonal => "tetragonal",
            Phase::Orthorhombic => "orthorhombic",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tetragonal" => Ok(Phase::Tetragonal),
            "orthorhombic" => Ok(Phase::Orthorhombic),
            other => Err(Error::domain(format!(
                "unknown phase {other:?} (expected \"tetragonal\" or \"orthorhombic\")"
            ))),
        }
    }
}

/// Phase-resolved phonon mode sets plus the transition temperature.
#[derive(Debug, Clone)]
pub struct MaterialModel<T: Real> {
    pub name: String,
    /// Transition temperature in K.
    pub tc: T,
    pub tetragonal_modes: Vec<PhononMode<T>>,
    pub orthorhombic_modes: Vec<PhononMode<T>>,
}

fn check_mode_set<T: Real>(phase: Phase, modes: &[PhononMode<T>]) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::domain(format!("{phase} mode set is empty")));
    }
    for m in modes {
        m.validate()?;
    }
    for (i, a) in modes.iter().enumerate() {
        if modes[..i].iter().any(|b| b.label == a.label) {
            return Err(Error::domain(format!(
                "duplicate label {:?} in {phase} mode set",
                a.label
            )));
        }
    }
    Ok(())
}

impl<T: Real> MaterialModel<T> {
    pub fn new(
        name: impl Into<String>,
        tc: T,
        tetragonal_modes: Vec<PhononMode<T>>,
        orthorhombic_modes: Vec<PhononMode<T>>,
    ) -> Result<Self> {
        if !(tc > T::zero()) {
            return Err(Error::domain(format!("tc must be > 0 K, got {tc}")));
        }
        check_mode_set(Phase::Tetragonal, &tetragonal_modes)?;
        check_mode_set(Phase::Orthorhombic, &orthorhombic_modes)?;
        Ok(MaterialModel { name: name.into(), tc, tetragonal_modes, orthorhombic_modes })
    }

    /// Phase at temperature `t` (K). The boundary `t == tc` maps to the
    /// high-temperature (tetragonal) phase: the transition is crossed upon
    /// cooling below `tc`.
    pub fn phase_at(&self, t: T) -> Phase {
        if t < self.tc {
            Phase::Orthorhombic
        } else {
            Phase::Tetragonal
        }
    }

    pub fn modes_of(&self, phase: Phase) -> &[PhononMode<T>] {
        match phase {
            Phase::Tetragonal => &self.tetragonal_modes,
            Phase::Orthorhombic => &self.orthorhombic_modes,
        }
    }
}

/// Empirical cavity-frequency calibration `omega_c = amplitude / length^exponent`
/// with `length` in um and `omega_c` in THz.
///
/// The default is half-wave antenna scaling (`exponent = 1`) anchored so a
/// 60 um slot resonates at 1.52 THz; `exponent` is exposed so the curve can
/// be refit to measured resonance-vs-length data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityCalibration<T: Real> {
    /// THz * um^exponent.
    pub amplitude: T,
    pub exponent: T,
}

impl<T: Real> Default for CavityCalibration<T> {
    fn default() -> Self {
        CavityCalibration { amplitude: lit(91.2), exponent: T::one() }
    }
}

impl<T: Real> CavityCalibration<T> {
    pub fn new(amplitude: T, exponent: T) -> Result<Self> {
        if !(amplitude > T::zero()) || !(exponent > T::zero()) {
            return Err(Error::domain(format!(
                "cavity calibration requires amplitude > 0 and exponent > 0, got A={amplitude}, p={exponent}"
            )));
        }
        Ok(CavityCalibration { amplitude, exponent })
    }
}

/// Light-matter coupling strength `g = (nu/2) sqrt(omega_mode / omega_c)`.
///
/// At resonance (`omega_c == omega_mode`) this reduces to `g = nu/2` exactly.
pub fn coupling_strength<T: Real>(nu: T, omega_mode: T, omega_c: T) -> Result<T> {
    if !(nu >= T::zero()) {
        return Err(Error::domain(format!("coupling_strength: nu must be >= 0, got {nu}")));
    }
    if !(omega_mode > T::zero()) || !(omega_c > T::zero()) {
        return Err(Error::domain(format!(
            "coupling_strength: frequencies must be > 0, got omega_mode={omega_mode}, omega_c={omega_c}"
        )));
    }
    Ok(nu / lit::<T>(2.0) * (omega_mode / omega_c).sqrt())
}

/// Cavity resonance frequency for a slot of `length_um` micrometres.
pub fn cavity_frequency<T: Real>(length_um: T, cal: &CavityCalibration<T>) -> Result<T> {
    if !(length_um > T::zero()) {
        return Err(Error::domain(format!(
            "cavity_frequency: length must be > 0 um, got {length_um}"
        )));
    }
    Ok(cal.amplitude / length_um.powf(cal.exponent))
}

/// Phonon mode set active at temperature `t` (K).
///
/// A step function of `t` with its single discontinuity at `tc`; the
/// boundary itself returns the tetragonal set.
pub fn mode_set_at<T: Real>(material: &MaterialModel<T>, t: T) -> Result<&[PhononMode<T>]> {
    if !(t > T::zero()) {
        return Err(Error::domain(format!("mode_set_at: temperature must be > 0 K, got {t}")));
    }
    Ok(material.modes_of(material.phase_at(t)))
}

/// Effective ionic plasma frequency from a normalized coupling measured at
/// resonance: `nu = 2 (g/omega) omega_mode`.
pub fn nu_from_normalized_coupling<T: Real>(g_over_omega: T, omega_mode: T) -> T {
    lit::<T>(2.0) * g_over_omega * omega_mode
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preset;

    #[test]
    fn coupling_at_resonance_is_half_nu() {
        let g: f64 = coupling_strength(0.684, 0.95, 0.95).unwrap();
        assert!((g - 0.342).abs() < 1e-15);
        assert!((g / 0.95 - 0.36).abs() < 1e-12);
    }

    #[test]
    fn coupling_decoupled_and_detuned() {
        assert_eq!(coupling_strength(0.0, 1.3, 2.2).unwrap(), 0.0f64);
        let g: f64 = coupling_strength(1.0, 1.0, 4.0).unwrap();
        assert!((g - 0.25).abs() < 1e-15);
    }

    #[test]
    fn coupling_rejects_bad_inputs() {
        assert!(coupling_strength::<f64>(-0.1, 1.0, 1.0).is_err());
        assert!(coupling_strength::<f64>(0.1, 0.0, 1.0).is_err());
        assert!(coupling_strength::<f64>(0.1, 1.0, -2.0).is_err());
    }

    #[test]
    fn cavity_frequency_anchor() {
        let cal = CavityCalibration::<f64>::default();
        assert!((cavity_frequency(60.0, &cal).unwrap() - 1.52).abs() < 1e-12);
        assert!((cavity_frequency(120.0, &cal).unwrap() - 0.76).abs() < 1e-12);
        assert!((cavity_frequency(91.2, &cal).unwrap() - 1.0).abs() < 1e-12);
        assert!(cavity_frequency(0.0, &cal).is_err());
    }

    #[test]
    fn mode_set_switches_at_tc() {
        let m = preset::mapbi3::<f64>();
        let high = mode_set_at(&m, 165.0).unwrap();
        assert_eq!(high.len(), 2);
        assert_eq!(high[0].omega, 0.95);
        assert_eq!(high[1].omega, 1.78);
        let low = mode_set_at(&m, 151.0).unwrap();
        assert_eq!(low.len(), 3);
        assert_eq!(low[0].omega, 0.98);
        assert_eq!(low[1].omega, 1.7);
        assert_eq!(low[2].omega, 0.77);
        // boundary convention: tc itself is tetragonal
        assert_eq!(mode_set_at(&m, 162.5).unwrap().len(), 2);
        assert!(mode_set_at(&m, 0.0).is_err());
    }

    #[test]
    fn nu_round_trip() {
        assert!((nu_from_normalized_coupling::<f64>(0.35, 1.78) - 1.246).abs() < 1e-12);
        assert!((nu_from_normalized_coupling::<f64>(0.25, 0.77) - 0.385).abs() < 1e-12);
        assert_eq!(nu_from_normalized_coupling::<f64>(0.0, 3.7), 0.0);
        // identity: nu -> g/omega at resonance -> nu
        for &(omega, nu) in &[(0.95f64, 0.684), (1.78, 1.246), (0.77, 0.385)] {
            let g = coupling_strength(nu, omega, omega).unwrap();
            let back = nu_from_normalized_coupling(g / omega, omega);
            assert!((back - nu).abs() < 1e-15);
        }
    }

    #[test]
    fn duplicate_labels_rejected() {
        let m = PhononMode::new("TO1", 1.0, 0.1, 0.0).unwrap();
        let err = MaterialModel::new("x", 100.0, vec![m.clone(), m.clone()], vec![m]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
