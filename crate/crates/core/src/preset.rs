//! Built-in material models and the TOML schema for user-defined ones.
//!
//! A material file is a key/value document with two arrays of tables:
//!
//! ```toml
//! name = "mapbi3"
//! tc_kelvin = 162.5
//!
//! [[tetragonal]]
//! label = "TO1"
//! omega_thz = 0.95
//! nu_thz = 0.684
//! gamma_thz = 0.05
//! # ... more [[tetragonal]] / [[orthorhombic]] tables
//! ```
//!
//! Units are fixed by the field names: THz and K.

use crate::error::{Error, Result};
use crate::model::{MaterialModel, PhononMode};
use crate::Real;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    label: String,
    omega_thz: f64,
    nu_thz: f64,
    #[serde(default)]
    gamma_thz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    name: String,
    tc_kelvin: f64,
    tetragonal: Vec<RawMode>,
    orthorhombic: Vec<RawMode>,
}

fn convert<T: Real>(raw: &RawMaterial) -> Result<MaterialModel<T>> {
    let conv = |modes: &[RawMode]| -> Result<Vec<PhononMode<T>>> {
        modes
            .iter()
            .map(|m| {
                PhononMode::new(
                    m.label.clone(),
                    crate::lit(m.omega_thz),
                    crate::lit(m.nu_thz),
                    crate::lit(m.gamma_thz),
                )
            })
            .collect()
    };
    MaterialModel::new(
        raw.name.clone(),
        crate::lit(raw.tc_kelvin),
        conv(&raw.tetragonal)?,
        conv(&raw.orthorhombic)?,
    )
}

/// Parse a material model from TOML text.
pub fn material_from_toml<T: Real>(text: &str) -> Result<MaterialModel<T>> {
    let raw: RawMaterial = toml::from_str(text)
        .map_err(|e| Error::Parse { line: toml_error_line(&e), msg: e.to_string() })?;
    convert(&raw)
}

/// Load a material model from a TOML file on disk.
pub fn material_from_file<T: Real>(path: impl AsRef<std::path::Path>) -> Result<MaterialModel<T>> {
    let text = std::fs::read_to_string(path)?;
    material_from_toml(&text)
}

fn toml_error_line(e: &toml::de::Error) -> usize {
    // toml reports byte spans, not lines; recover a 1-based line when we can.
    e.span().map(|s| s.start).unwrap_or(0).max(1)
}

static MAPBI3_TOML: &str = include_str!("../presets/mapbi3.toml");

/// MAPbI3 preset: two tetragonal TO modes above 162.5 K, three orthorhombic
/// modes below.
pub fn mapbi3<T: Real>() -> MaterialModel<T> {
    material_from_toml(MAPBI3_TOML).expect("built-in preset parses")
}

/// Names of the built-in presets.
pub fn names() -> &'static [&'static str] {
    &["mapbi3"]
}

/// Look up a built-in preset by name.
pub fn by_name<T: Real>(name: &str) -> Result<MaterialModel<T>> {
    match name {
        "mapbi3" => Ok(mapbi3()),
        other => Err(Error::domain(format!(
            "unknown preset {other:?} (available: {})",
            names().join(", ")
        ))),
    }
}
