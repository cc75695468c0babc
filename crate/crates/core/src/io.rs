//! CSV schemas and deterministic formatting for every file the toolkit
//! reads or writes.
//!
//! All writers emit `#`-prefixed metadata lines first (effective
//! configuration echo), then a mandatory header row, then data rows in a
//! fixed order. Floats are printed with 9 significant digits, switching to
//! lowercase scientific notation below 1e-3, so identical inputs produce
//! byte-identical files. Readers skip blank and `#` lines and enforce the
//! documented schemas, reporting 1-based line numbers on malformed input.
//!
//! Schemas:
//! - dispersion: `omega_c_thz,branch,omega_thz,f_pt,f_ph_<label>...`
//! - branch points: `omega_c_thz|length_um,omega_meas_thz[,weight][,branch]`
//! - transmittance map: `omega_thz,<omega_c values as column headers>`
//! - temperature scan: `t_kelvin,phase,branch,omega_thz`
//! - fit report (kv): `key = value` lines

use crate::dispersion::{DispersionMap, TemperatureScan};
use crate::error::{Error, Result};
use crate::fit::{BranchPoint, FitResult};
use crate::model::{cavity_frequency, CavityCalibration};
use crate::spectra::{Spectrum, TransmittanceMap};
use crate::Real;
use std::io::{BufRead, Write};

/// Format with 9 significant digits; lowercase scientific below 1e-3.
pub fn format_float<T: Real>(x: T) -> String {
    let v = x.to_f64().unwrap_or(f64::NAN);
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    if v.abs() < 1e-3 {
        format!("{v:.8e}")
    } else {
        let mag = v.abs().log10().floor() as i32;
        let decimals = (8 - mag).max(0) as usize;
        format!("{v:.decimals$}")
    }
}

fn write_meta<W: Write>(w: &mut W, meta: &[(String, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

/// Dispersion table: one row per (grid point, branch), branches ordered by
/// connectivity label.
pub fn write_dispersion_csv<T: Real, W: Write>(
    w: &mut W,
    map: &DispersionMap<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(w, meta)?;
    let mut header = String::from("omega_c_thz,branch,omega_thz,f_pt");
    for label in &map.mode_labels {
        header.push_str(",f_ph_");
        header.push_str(label);
    }
    writeln!(w, "{header}")?;
    for (i, &wc) in map.omega_c_grid.iter().enumerate() {
        for (j, mode) in map.points[i].iter().enumerate() {
            let mut row = format!(
                "{},{},{},{}",
                format_float(wc),
                map.labels[i][j],
                format_float(mode.omega),
                format_float(mode.photon_fraction)
            );
            for &f in &mode.phonon_fractions {
                row.push(',');
                row.push_str(&format_float(f));
            }
            writeln!(w, "{row}")?;
        }
    }
    Ok(())
}

/// Temperature scan: one row per (temperature, branch).
pub fn write_temperature_scan_csv<T: Real, W: Write>(
    w: &mut W,
    scan: &TemperatureScan<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "t_kelvin,phase,branch,omega_thz")?;
    for (i, &t) in scan.t_grid.iter().enumerate() {
        for (b, &omega) in scan.branch_table[i].iter().enumerate() {
            writeln!(
                w,
                "{},{},{b},{}",
                format_float(t),
                scan.phase_labels[i],
                format_float(omega)
            )?;
        }
    }
    Ok(())
}

/// Single spectrum as `omega_thz,transmittance` rows.
pub fn write_spectrum_csv<T: Real, W: Write>(
    w: &mut W,
    spectrum: &Spectrum<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "omega_thz,transmittance")?;
    for (&omega, &t) in spectrum.omega_grid.iter().zip(&spectrum.transmittance) {
        writeln!(w, "{},{}", format_float(omega), format_float(t))?;
    }
    Ok(())
}

/// Gridded map: rows are probe frequencies, columns cavity frequencies.
pub fn write_map_csv<T: Real, W: Write>(
    w: &mut W,
    map: &TransmittanceMap<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(w, meta)?;
    let mut header = String::from("omega_thz");
    for &wc in &map.omega_c_grid {
        header.push(',');
        header.push_str(&format_float(wc));
    }
    writeln!(w, "{header}")?;
    for (j, &omega) in map.omega_grid.iter().enumerate() {
        let mut row = format_float(omega);
        for col in &map.columns {
            row.push(',');
            row.push_str(&format_float(col[j]));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Branch points with the full optional-column set; empty `branch` cells
/// mean "no hint".
pub fn write_branch_points_csv<T: Real, W: Write>(
    w: &mut W,
    points: &[BranchPoint<T>],
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "omega_c_thz,omega_meas_thz,weight,branch")?;
    for p in points {
        let hint = p.branch_hint.map(|b| b.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{hint}",
            format_float(p.omega_c),
            format_float(p.omega_meas),
            format_float(p.weight)
        )?;
    }
    Ok(())
}

/// Machine-readable fit report as `key = value` lines.
pub fn write_fit_report_kv<T: Real, W: Write>(
    w: &mut W,
    fit: &FitResult<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "converged = {}", fit.converged)?;
    writeln!(w, "iterations = {}", fit.iterations)?;
    writeln!(w, "rms_residual_thz = {}", format_float(fit.rms_residual))?;
    writeln!(w, "n_modes = {}", fit.labels.len())?;
    for i in 0..fit.labels.len() {
        writeln!(w, "mode_{i}_label = {}", fit.labels[i])?;
        writeln!(w, "mode_{i}_omega_thz = {}", format_float(fit.omegas[i]))?;
        writeln!(w, "mode_{i}_nu_thz = {}", format_float(fit.nu[i]))?;
        writeln!(w, "mode_{i}_g_over_omega = {}", format_float(fit.normalized_couplings[i]))?;
    }
    Ok(())
}

/// Human-readable fit report.
pub fn write_fit_report_text<T: Real, W: Write>(
    w: &mut W,
    fit: &FitResult<T>,
    meta: &[(String, String)],
) -> Result<()> {
    write_meta(w, meta)?;
    writeln!(
        w,
        "coupling fit: {} mode(s), {} pass(es), {}",
        fit.labels.len(),
        fit.iterations,
        if fit.converged { "converged" } else { "NOT converged" }
    )?;
    writeln!(w, "weighted rms residual: {} THz", format_float(fit.rms_residual))?;
    writeln!(w, "label   omega_thz     nu_thz        g/omega")?;
    for i in 0..fit.labels.len() {
        writeln!(
            w,
            "{:<7} {:<13} {:<13} {}",
            fit.labels[i],
            format_float(fit.omegas[i]),
            format_float(fit.nu[i]),
            format_float(fit.normalized_couplings[i])
        )?;
    }
    writeln!(w, "per-point residuals (predicted - measured, THz):")?;
    for (i, &r) in fit.per_point_residuals.iter().enumerate() {
        writeln!(w, "  point {i}: {}", format_float(r))?;
    }
    Ok(())
}

/// Lines with content: skips blanks and `#` comments, keeps 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_float<T: Real>(cell: &str, line: usize, what: &str) -> Result<T> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} from {cell:?}"),
    })?;
    T::from_f64(v).ok_or(Error::Parse {
        line,
        msg: format!("{what} {v} is not representable in the scalar type"),
    })
}

/// Read branch points. The header must name `omega_c_thz` or `length_um`
/// (exactly one) plus `omega_meas_thz`; `weight` and `branch` are optional.
/// Column order is free; unknown columns are rejected. Slot lengths are
/// converted to cavity frequencies through `cal`.
pub fn read_branch_points_csv<T: Real, R: BufRead>(
    reader: R,
    cal: &CavityCalibration<T>,
) -> Result<Vec<BranchPoint<T>>> {
    let mut text = String::new();
    let mut r = reader;
    r.read_to_string(&mut text)?;
    let mut lines = content_lines(&text);

    let (header_line, header) = lines
        .next()
        .ok_or(Error::Parse { line: 1, msg: "missing header row".into() })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    const KNOWN: [&str; 5] = ["omega_c_thz", "length_um", "omega_meas_thz", "weight", "branch"];
    for c in &cols {
        if !KNOWN.contains(c) {
            return Err(Error::Parse {
                line: header_line,
                msg: format!("unknown column {c:?} (expected a subset of {KNOWN:?})"),
            });
        }
        if cols.iter().filter(|x| *x == c).count() > 1 {
            return Err(Error::Parse {
                line: header_line,
                msg: format!("duplicate column {c:?}"),
            });
        }
    }
    let idx = |name: &str| cols.iter().position(|c| *c == name);
    let omega_c_col = idx("omega_c_thz");
    let length_col = idx("length_um");
    match (omega_c_col, length_col) {
        (Some(_), Some(_)) => {
            return Err(Error::Parse {
                line: header_line,
                msg: "give either omega_c_thz or length_um, not both".into(),
            })
        }
        (None, None) => {
            return Err(Error::Parse {
                line: header_line,
                msg: "missing omega_c_thz or length_um column".into(),
            })
        }
        _ => {}
    }
    let meas_col = idx("omega_meas_thz").ok_or(Error::Parse {
        line: header_line,
        msg: "missing omega_meas_thz column".into(),
    })?;
    let weight_col = idx("weight");
    let branch_col = idx("branch");

    let mut points = Vec::new();
    for (line, row) in lines {
        let cells: Vec<&str> = row.split(',').map(str::trim).collect();
        if cells.len() != cols.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} cells, found {}", cols.len(), cells.len()),
            });
        }
        let omega_c = match (omega_c_col, length_col) {
            (Some(i), _) => parse_float(cells[i], line, "omega_c_thz")?,
            (_, Some(i)) => {
                let length = parse_float(cells[i], line, "length_um")?;
                cavity_frequency(length, cal)
                    .map_err(|e| Error::Parse { line, msg: e.to_string() })?
            }
            _ => unreachable!(),
        };
        let omega_meas = parse_float(cells[meas_col], line, "omega_meas_thz")?;
        let mut point = BranchPoint::new(omega_c, omega_meas)
            .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        if let Some(i) = weight_col {
            if !cells[i].is_empty() {
                let weight = parse_float(cells[i], line, "weight")?;
                point = point
                    .with_weight(weight)
                    .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            }
        }
        if let Some(i) = branch_col {
            if !cells[i].is_empty() {
                let b: usize = cells[i].parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("cannot parse branch index from {:?}", cells[i]),
                })?;
                point = point.with_branch_hint(b);
            }
        }
        points.push(point);
    }
    Ok(points)
}

/// Read a gridded transmittance map written by [`write_map_csv`].
pub fn read_map_csv<T: Real, R: BufRead>(reader: R) -> Result<TransmittanceMap<T>> {
    let mut text = String::new();
    let mut r = reader;
    r.read_to_string(&mut text)?;
    let mut lines = content_lines(&text);

    let (header_line, header) = lines
        .next()
        .ok_or(Error::Parse { line: 1, msg: "missing header row".into() })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"omega_thz") {
        return Err(Error::Parse {
            line: header_line,
            msg: format!("first column must be omega_thz, found {:?}", cols.first()),
        });
    }
    if cols.len() < 2 {
        return Err(Error::Parse {
            line: header_line,
            msg: "map needs at least one omega_c column".into(),
        });
    }
    let mut omega_c_grid = Vec::with_capacity(cols.len() - 1);
    for c in &cols[1..] {
        omega_c_grid.push(parse_float::<T>(c, header_line, "omega_c header")?);
    }
    let n_cols = omega_c_grid.len();
    let mut omega_grid = Vec::new();
    let mut columns = vec![Vec::new(); n_cols];
    for (line, row) in lines {
        let cells: Vec<&str> = row.split(',').map(str::trim).collect();
        if cells.len() != n_cols + 1 {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} cells, found {}", n_cols + 1, cells.len()),
            });
        }
        omega_grid.push(parse_float::<T>(cells[0], line, "omega_thz")?);
        for (k, cell) in cells[1..].iter().enumerate() {
            columns[k].push(parse_float::<T>(cell, line, "transmittance")?);
        }
    }
    if omega_grid.is_empty() {
        return Err(Error::Parse { line: header_line, msg: "map has no data rows".into() });
    }
    Ok(TransmittanceMap { omega_c_grid, omega_grid, columns })
}

/// Read a `key = value` report written by [`write_fit_report_kv`].
pub fn read_kv<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut text = String::new();
    let mut r = reader;
    r.read_to_string(&mut text)?;
    let mut out = Vec::new();
    for (line, l) in content_lines(&text) {
        match l.split_once('=') {
            Some((k, v)) => out.push((k.trim().to_string(), v.trim().to_string())),
            None => {
                return Err(Error::Parse { line, msg: format!("expected key = value, got {l:?}") })
            }
        }
    }
    Ok(out)
}
