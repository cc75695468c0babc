//! Multimode Hopfield model of ultrastrong phonon-photon coupling in a
//! terahertz cavity.
//!
//! A single cavity mode couples to N transverse-optical phonon modes through
//! bilinear light-matter terms plus the diamagnetic (A^2) contribution. This
//! crate builds and diagonalizes the resulting Bogoliubov dynamical matrix,
//! sweeps polariton dispersions over cavity frequency and temperature
//! (including across a structural phase transition that changes the phonon
//! mode set), fits effective ionic plasma frequencies to measured branch
//! points, and synthesizes classical damped transmittance spectra and maps.
//!
//! # Unit convention
//!
//! All frequencies are ordinary frequencies in THz, never angular. Every
//! equation in the model is homogeneous in frequency (ratios and products
//! only), so the convention is self-consistent as long as it is applied
//! uniformly; factors of 2*pi never appear. Temperatures are in K, slot
//! lengths in um, film thicknesses in nm.
//!
//! # Numerical scalar type
//!
//! The numerics are generic over the floating-point scalar through the
//! [`Real`] trait (implemented for `f32` and `f64`). The concrete aliases at
//! the crate root ([`PhononMode64`], [`MaterialModel64`], ...) pick `f64`,
//! which is what the stated tolerances throughout the crate assume.

pub mod dispersion;
pub mod error;
pub mod fit;
pub mod hopfield;
pub mod io;
mod linalg;
pub mod model;
pub mod preset;
pub mod spectra;

pub use error::{Error, Result};
pub use model::{CavityCalibration, MaterialModel, Phase, PhononMode};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the whole crate is generic over.
///
/// A blanket impl covers every type with the listed bounds; in practice that
/// means `f32` and `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + 'static
{
}

/// Shorthand for pulling an `f64` literal into the generic scalar type.
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

pub type PhononMode64 = model::PhononMode<f64>;
pub type MaterialModel64 = model::MaterialModel<f64>;
pub type CavityCalibration64 = model::CavityCalibration<f64>;
pub type DynamicalMatrix64 = hopfield::DynamicalMatrix<f64>;
pub type PolaritonMode64 = hopfield::PolaritonMode<f64>;
pub type DispersionMap64 = dispersion::DispersionMap<f64>;
pub type TemperatureScan64 = dispersion::TemperatureScan<f64>;
pub type BranchPoint64 = fit::BranchPoint<f64>;
pub type FitResult64 = fit::FitResult<f64>;
pub type Spectrum64 = spectra::Spectrum<f64>;
pub type TransmittanceMap64 = spectra::TransmittanceMap<f64>;

pub type PhononMode32 = model::PhononMode<f32>;
pub type MaterialModel32 = model::MaterialModel<f32>;
