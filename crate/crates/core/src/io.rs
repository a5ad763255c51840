//! CSV and TOML output, and CSV input for tabulated fields.
//!
//! Field files hold one `(x_index, y_index, value)` row per node. Surface
//! fields use `y_index = 0` for the bottom row and `ny − 1` for the top.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BulkField, StripGrid, SurfaceField};
use crate::harness::{ConvergenceTable, CtsDepReport, FittedSlopes};
use crate::model::EnergyReport;

#[derive(Debug, Deserialize)]
struct Row {
    x_index: usize,
    y_index: usize,
    value: f64,
}

fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for r in rdr.deserialize() {
        rows.push(r?);
    }
    Ok(rows)
}

/// Reads a bulk field; every node must appear exactly once.
pub fn read_bulk_csv(path: &Path, grid: &StripGrid) -> Result<BulkField> {
    let mut u = BulkField::constant(grid, f64::NAN);
    for r in read_rows(path)? {
        let slot = u.values.get_mut([r.x_index, r.y_index]).ok_or_else(|| {
            Error::input(format!("{}: node ({}, {}) is off the grid", path.display(), r.x_index, r.y_index))
        })?;
        if !slot.is_nan() {
            return Err(Error::input(format!("{}: duplicate node ({}, {})", path.display(), r.x_index, r.y_index)));
        }
        *slot = r.value;
    }
    if !u.is_finite() {
        return Err(Error::input(format!("{}: missing or non-finite nodes", path.display())));
    }
    Ok(u)
}

pub fn read_surface_csv(path: &Path, grid: &StripGrid) -> Result<SurfaceField> {
    let mut s = SurfaceField::constant(grid, f64::NAN);
    let top = grid.ny() - 1;
    for r in read_rows(path)? {
        let row = if r.y_index == 0 {
            &mut s.bottom
        } else if r.y_index == top {
            &mut s.top
        } else {
            return Err(Error::input(format!("{}: y_index {} is not a boundary row", path.display(), r.y_index)));
        };
        let slot = row
            .get_mut(r.x_index)
            .ok_or_else(|| Error::input(format!("{}: x_index {} is off the grid", path.display(), r.x_index)))?;
        *slot = r.value;
    }
    if !s.is_finite() {
        return Err(Error::input(format!("{}: missing or non-finite nodes", path.display())));
    }
    Ok(s)
}

/// Writes `u`; when `phi_reconstructed` is given an extra column carries it
/// on the boundary rows and stays empty in the interior.
pub fn write_bulk_csv(path: &Path, u: &BulkField, phi_reconstructed: Option<&SurfaceField>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let ny = u.values.ncols();
    if phi_reconstructed.is_some() {
        w.write_record(["x_index", "y_index", "value", "phi_reconstructed"])?;
    } else {
        w.write_record(["x_index", "y_index", "value"])?;
    }
    for ((i, j), v) in u.values.indexed_iter() {
        let mut rec = vec![i.to_string(), j.to_string(), v.to_string()];
        if let Some(phi) = phi_reconstructed {
            rec.push(match j {
                0 => phi.bottom[i].to_string(),
                j if j == ny - 1 => phi.top[i].to_string(),
                _ => String::new(),
            });
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_surface_csv(path: &Path, grid: &StripGrid, phi: &SurfaceField) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x_index", "y_index", "value"])?;
    for (j, row) in [(0, &phi.bottom), (grid.ny() - 1, &phi.top)] {
        for (i, v) in row.iter().enumerate() {
            w.write_record([i.to_string(), j.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_energy_csv(path: &Path, reports: &[EnergyReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "t",
        "energy",
        "bulk_dissipation",
        "surface_dissipation",
        "forcing_power",
        "identity_residual",
    ])?;
    for r in reports {
        w.write_record(
            [
                r.time,
                r.energy,
                r.bulk_dissipation,
                r.surface_dissipation,
                r.forcing_power,
                r.identity_residual,
            ]
            .map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `param, x_omega, x_gamma, mismatch, status`; failed runs leave the norm
/// columns empty and carry the message in `status`.
pub fn write_table_csv(path: &Path, table: &ConvergenceTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["param", "x_omega", "x_gamma", "mismatch", "status"])?;
    for r in &table.rows {
        let rec = match &r.norms {
            Ok(n) => [
                r.param.to_string(),
                n.x_omega.to_string(),
                n.x_gamma.to_string(),
                n.boundary_mismatch.to_string(),
                "ok".into(),
            ],
            Err(e) => [r.param.to_string(), String::new(), String::new(), String::new(), e.clone()],
        };
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ctsdep_csv(path: &Path, report: &CtsDepReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["delta", "diff", "ratio"])?;
    for r in &report.rows {
        w.write_record([
            r.delta.to_string(),
            r.diff.to_string(),
            r.ratio.map_or(String::new(), |v| v.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Named pass/fail check recorded in `fit.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitFile {
    pub slopes: FittedSlopes,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: String,
    pub steps: usize,
    pub t_final: f64,
    pub dt: f64,
    pub energy_initial: Option<f64>,
    pub energy_final: Option<f64>,
    pub u_l2: f64,
    pub u_h1_seminorm: f64,
    pub u_linf: f64,
    pub phi_l2: f64,
    pub phi_h1_seminorm: f64,
    pub phi_linf: f64,
    pub compatibility_defect: f64,
    pub warnings: Vec<String>,
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string_pretty(value).map_err(|e| Error::Input(e.to_string()))?;
    File::create(path)?.write_all(text.as_bytes())?;
    Ok(())
}
