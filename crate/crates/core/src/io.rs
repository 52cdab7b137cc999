//! CSV and JSON artifacts. Every float is written with 17 significant digits.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Dimension;
use crate::hydro::{FluxSeries, HydroFrame};
use crate::phase::PhaseSheet;
use crate::profile::SolitonProfile;
use crate::solver::Trajectory;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn coord_name(dim: Dimension) -> &'static str {
    match dim {
        Dimension::One => "x",
        Dimension::Three => "r",
    }
}

fn line(out: &mut String, cells: &[f64]) {
    let row: Vec<String> = cells.iter().map(|&v| num(v)).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// `t, x|r, re_psi, im_psi`, time-outer, every `every`-th snapshot.
pub fn trajectory_csv(traj: &Trajectory, every: usize) -> String {
    let every = every.max(1);
    let grid = traj.grid();
    let mut out = format!("t,{},re_psi,im_psi\n", coord_name(grid.dimension()));
    for snap in traj.snapshots.iter().step_by(every) {
        for (k, v) in snap.values.iter().enumerate() {
            line(&mut out, &[snap.time, grid.coord(k), v.re, v.im]);
        }
    }
    out
}

pub fn conserved_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,mass,energy,variance,dilation,h1\n");
    for (s, c) in traj.snapshots.iter().zip(&traj.conserved) {
        line(&mut out, &[s.time, c.mass, c.energy, c.variance, c.dilation, c.h1_norm]);
    }
    out
}

pub fn flux_csv(series: &FluxSeries) -> String {
    let mut out = String::from("t,R,flux,cumulative,cumulative_trapezoid,ball_mass\n");
    for (t, &time) in series.times.iter().enumerate() {
        for (j, &r) in series.radii.iter().enumerate() {
            line(
                &mut out,
                &[
                    time,
                    r,
                    series.flux[t][j],
                    series.cumulative[t][j],
                    series.cumulative_trapezoid[t][j],
                    series.ball_mass[t][j],
                ],
            );
        }
    }
    out
}

pub fn hydro_csv(frame: &HydroFrame) -> String {
    let mut out = String::from("r,eta,rho,current,velocity,mask\n");
    for k in 0..frame.rho.len() {
        let mask = if frame.zero_set_mask[k] { 1.0 } else { 0.0 };
        let cells = [
            frame.grid.coord(k),
            frame.eta[k],
            frame.rho[k],
            frame.current[k],
            frame.velocity[k],
        ];
        let row: Vec<String> = cells.iter().map(|&v| num(v)).collect();
        let _ = writeln!(out, "{},{}", row.join(","), mask as u8);
    }
    out
}

pub fn phase_csv(sheet: &PhaseSheet) -> String {
    let mut out = String::from("t,r,theta\n");
    for (t, &time) in sheet.times.iter().enumerate() {
        for (j, &r) in sheet.coords.iter().enumerate() {
            line(&mut out, &[time, r, sheet.theta[t][j]]);
        }
    }
    out
}

pub fn profile_csv(profile: &SolitonProfile) -> String {
    let mut out = String::from("r,u\n");
    for (k, &u) in profile.u.iter().enumerate() {
        line(&mut out, &[profile.grid.coord(k), u]);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSidecar {
    #[serde(rename = "E")]
    pub energy: f64,
    pub ode_residual: f64,
    pub node_count: usize,
    pub u0: f64,
}

impl From<&SolitonProfile> for ProfileSidecar {
    fn from(p: &SolitonProfile) -> Self {
        Self {
            energy: p.energy_param,
            ode_residual: p.ode_residual,
            node_count: p.node_count,
            u0: p.u0,
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// A parsed numeric CSV: header names and rows of floats.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Unsupported(format!("{}: empty file", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let row = l
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Unsupported(format!("{}: line {}: {e}", path.display(), i + 2)))?;
        if row.len() != header.len() {
            return Err(Error::Unsupported(format!(
                "{}: line {}: {} cells, expected {}",
                path.display(),
                i + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}
