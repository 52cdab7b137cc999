//! Good boxes, phase lifting and the phase diagnostics.
//!
//! The phase follows `ψ = η e^{-iθ}`, so a soliton `u e^{iEt}` has
//! `θ = -Et` and the velocity is `v = -∇θ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{nodes_in, Dimension};
use crate::model::NonlinearitySpec;
use crate::solver::Trajectory;

/// Wrapped jumps at least this large mean the phase is under-resolved.
pub const MAX_JUMP: f64 = PI - 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodBox {
    pub interval: (f64, f64),
    pub t_start: f64,
    pub t_end: f64,
    pub delta: f64,
    pub reference: (f64, f64),
}

impl GoodBox {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSheet {
    pub good_box: GoodBox,
    /// Grid indices of the box nodes.
    pub nodes: Vec<usize>,
    pub coords: Vec<f64>,
    /// Snapshot indices of the box rows.
    pub snapshots: Vec<usize>,
    pub times: Vec<f64>,
    /// `θ[time][node]`.
    pub theta: Vec<Vec<f64>>,
    pub eta: Vec<Vec<f64>>,
    /// Principal value `-Arg ψ` at the reference sample.
    pub branch_ref: f64,
    pub reference_node: usize,
    pub reference_snapshot: usize,
}

/// Principal phase `θ = -Arg ψ`.
fn principal(z: Complex64) -> f64 {
    -z.arg()
}

fn snapshot_range(traj: &Trajectory, t_start: f64, t_end: f64) -> Vec<usize> {
    let slack = 1e-9 * traj.dt.max(f64::MIN_POSITIVE);
    traj.snapshots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.time >= t_start - slack && s.time <= t_end + slack)
        .map(|(i, _)| i)
        .collect()
}

/// Maximal intervals where `η ≥ δ/2` at every snapshot from `t_start` on.
///
/// The time extent of every box is `[t_start, t_final]`; the reference point
/// is the node of largest late-time amplitude inside the interval. In 3D the
/// origin node is excluded.
pub fn find_good_boxes(traj: &Trajectory, delta: f64, min_width: f64, t_start: f64) -> Result<Vec<GoodBox>> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", "must be > 0"));
    }
    let grid = traj.grid();
    let rows = snapshot_range(traj, t_start, f64::INFINITY);
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let n = grid.len();
    let mut good = vec![true; n];
    for &t in &rows {
        for (k, v) in traj.snapshots[t].values.iter().enumerate() {
            if v.norm() < 0.5 * delta {
                good[k] = false;
            }
        }
    }
    if grid.dimension() == Dimension::Three {
        good[0] = false;
    }
    let last = *rows.last().unwrap();
    let t0 = traj.snapshots[rows[0]].time;
    let t1 = traj.snapshots[last].time;
    let mut boxes = Vec::new();
    let mut k = 0;
    while k < n {
        if !good[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && good[k] {
            k += 1;
        }
        let end = k - 1;
        let (lo, hi) = (grid.coord(start), grid.coord(end));
        if hi - lo >= min_width && end > start {
            let late = &traj.snapshots[last].values;
            let peak = (start..=end)
                .max_by(|&a, &b| late[a].norm().total_cmp(&late[b].norm()))
                .unwrap();
            boxes.push(GoodBox {
                interval: (lo, hi),
                t_start: t0,
                t_end: t1,
                delta,
                reference: (grid.coord(peak), t0),
            });
        }
    }
    Ok(boxes)
}

fn box_layout(traj: &Trajectory, gbox: &GoodBox) -> Result<(Vec<usize>, Vec<usize>)> {
    let grid = traj.grid();
    let (lo, hi) = gbox.interval;
    if !(lo <= hi) || lo < grid.r_min() || hi > grid.r_max() {
        return Err(Error::BadBox(format!("interval ({lo}, {hi}) outside the grid")));
    }
    if grid.dimension() == Dimension::Three && lo <= 0.0 {
        return Err(Error::BadBox("a radial box must exclude the origin".into()));
    }
    let nodes: Vec<usize> = nodes_in(grid, lo, hi).collect();
    let rows = snapshot_range(traj, gbox.t_start, gbox.t_end);
    if nodes.is_empty() || rows.is_empty() {
        return Err(Error::BadBox("box contains no samples".into()));
    }
    Ok((nodes, rows))
}

fn nearest_index(values: &[f64], target: f64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Unwrap the phase on a box: along space in the reference row, then along
/// time at every node in both directions from the reference time.
pub fn lift_phase(traj: &Trajectory, gbox: &GoodBox) -> Result<PhaseSheet> {
    let (nodes, rows) = box_layout(traj, gbox)?;
    let grid = traj.grid();
    let coords: Vec<f64> = nodes.iter().map(|&k| grid.coord(k)).collect();
    let times: Vec<f64> = rows.iter().map(|&t| traj.snapshots[t].time).collect();
    let psi = |t: usize, j: usize| traj.snapshots[rows[t]].values[nodes[j]];

    let mut eta = vec![vec![0.0; nodes.len()]; rows.len()];
    for (t, row) in eta.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = psi(t, j).norm();
            if *e < 0.5 * gbox.delta {
                return Err(Error::BadBox(format!(
                    "amplitude {e:e} below delta/2 at node {} snapshot {}",
                    nodes[j], rows[t]
                )));
            }
        }
    }
    let jr = nearest_index(&coords, gbox.reference.0);
    let tr = nearest_index(&times, gbox.reference.1);
    let branch_ref = principal(psi(tr, jr));

    let mut theta = vec![vec![0.0; nodes.len()]; rows.len()];
    theta[tr][jr] = branch_ref;
    let step = |from: Complex64, to: Complex64, node: usize, snapshot: usize| -> Result<f64> {
        // θ increment = -Arg(to / from)
        let d = -(to * from.conj()).arg();
        if d.abs() >= MAX_JUMP {
            return Err(Error::PhaseJump {
                node,
                snapshot,
                jump: d,
            });
        }
        Ok(d)
    };
    for j in jr + 1..nodes.len() {
        theta[tr][j] = theta[tr][j - 1] + step(psi(tr, j - 1), psi(tr, j), nodes[j], rows[tr])?;
    }
    for j in (0..jr).rev() {
        theta[tr][j] = theta[tr][j + 1] + step(psi(tr, j + 1), psi(tr, j), nodes[j], rows[tr])?;
    }
    for j in 0..nodes.len() {
        for t in tr + 1..rows.len() {
            theta[t][j] = theta[t - 1][j] + step(psi(t - 1, j), psi(t, j), nodes[j], rows[t])?;
        }
        for t in (0..tr).rev() {
            theta[t][j] = theta[t + 1][j] + step(psi(t + 1, j), psi(t, j), nodes[j], rows[t])?;
        }
    }
    Ok(PhaseSheet {
        good_box: *gbox,
        nodes,
        coords,
        snapshots: rows,
        times,
        theta,
        eta,
        branch_ref,
        reference_node: jr,
        reference_snapshot: tr,
    })
}

impl PhaseSheet {
    /// `max |η e^{-iθ} - ψ|` over the box.
    pub fn reconstruction_error(&self, traj: &Trajectory) -> f64 {
        let mut worst: f64 = 0.0;
        for (t, &s) in self.snapshots.iter().enumerate() {
            for (j, &k) in self.nodes.iter().enumerate() {
                let rebuilt = Complex64::from_polar(self.eta[t][j], -self.theta[t][j]);
                worst = worst.max((rebuilt - traj.snapshots[s].values[k]).norm());
            }
        }
        worst
    }

    /// Winding numbers of every elementary space-time plaquette, from the
    /// wrapped phase differences of the raw samples.
    pub fn plaquette_windings(&self, traj: &Trajectory) -> Vec<i64> {
        let psi = |t: usize, j: usize| traj.snapshots[self.snapshots[t]].values[self.nodes[j]];
        let d = |a: Complex64, b: Complex64| (b * a.conj()).arg();
        let mut out = Vec::new();
        for t in 0..self.snapshots.len().saturating_sub(1) {
            for j in 0..self.nodes.len().saturating_sub(1) {
                let loop_sum = d(psi(t, j), psi(t, j + 1))
                    + d(psi(t, j + 1), psi(t + 1, j + 1))
                    + d(psi(t + 1, j + 1), psi(t + 1, j))
                    + d(psi(t + 1, j), psi(t, j));
                out.push((loop_sum / (2.0 * PI)).round() as i64);
            }
        }
        out
    }

    /// Largest difference between this lift (space first) and a lift that
    /// unwraps time first along the reference node, then space in every row.
    pub fn path_discrepancy(&self, traj: &Trajectory) -> f64 {
        let psi = |t: usize, j: usize| traj.snapshots[self.snapshots[t]].values[self.nodes[j]];
        let inc = |from: Complex64, to: Complex64| -(to * from.conj()).arg();
        let (nt, nx) = (self.snapshots.len(), self.nodes.len());
        let (tr, jr) = (self.reference_snapshot, self.reference_node);
        let mut alt = vec![vec![0.0; nx]; nt];
        alt[tr][jr] = self.branch_ref;
        for t in tr + 1..nt {
            alt[t][jr] = alt[t - 1][jr] + inc(psi(t - 1, jr), psi(t, jr));
        }
        for t in (0..tr).rev() {
            alt[t][jr] = alt[t + 1][jr] + inc(psi(t + 1, jr), psi(t, jr));
        }
        let mut worst: f64 = 0.0;
        for t in 0..nt {
            for j in jr + 1..nx {
                alt[t][j] = alt[t][j - 1] + inc(psi(t, j - 1), psi(t, j));
            }
            for j in (0..jr).rev() {
                alt[t][j] = alt[t][j + 1] + inc(psi(t, j + 1), psi(t, j));
            }
            for j in 0..nx {
                worst = worst.max((alt[t][j] - self.theta[t][j]).abs());
            }
        }
        worst
    }
}

/// Centered first and second derivative weights, widest stencil that fits.
fn fd_weights(offset_left: usize, offset_right: usize) -> (&'static [f64], &'static [f64], usize) {
    const D1_6: [f64; 7] = [
        -1.0 / 60.0,
        3.0 / 20.0,
        -3.0 / 4.0,
        0.0,
        3.0 / 4.0,
        -3.0 / 20.0,
        1.0 / 60.0,
    ];
    const D2_6: [f64; 7] = [
        1.0 / 90.0,
        -3.0 / 20.0,
        3.0 / 2.0,
        -49.0 / 18.0,
        3.0 / 2.0,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    const D1_4: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
    const D2_4: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
    const D1_2: [f64; 3] = [-0.5, 0.0, 0.5];
    const D2_2: [f64; 3] = [1.0, -2.0, 1.0];
    let room = offset_left.min(offset_right);
    if room >= 3 {
        (&D1_6, &D2_6, 3)
    } else if room >= 2 {
        (&D1_4, &D2_4, 2)
    } else {
        (&D1_2, &D2_2, 1)
    }
}

/// Spatial derivatives along one row at interior index `j` (needs `j ≥ 1`).
fn space_derivs(row: &[f64], j: usize, h: f64) -> (f64, f64) {
    let (d1, d2, half) = fd_weights(j, row.len() - 1 - j);
    let mut a = 0.0;
    let mut b = 0.0;
    for (i, (w1, w2)) in d1.iter().zip(d2).enumerate() {
        let v = row[j + i - half];
        a += w1 * v;
        b += w2 * v;
    }
    (a / h, b / (h * h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarResiduals {
    /// Transport equation `η̇ = 2η'θ' + ηΔθ` (radial: `+ 2ηθ'/r` inside `Δθ`).
    pub res_a: f64,
    /// Amplitude equation `-Δη + F(η)η = θ̇η - ηθ'²`.
    pub res_b: f64,
}

/// Relative `L²(box)` residuals of the polar-form equations at the interior
/// samples (one sample away from every box edge).
///
/// Space derivatives use the widest centered stencil that fits (sixth order
/// in the bulk); time derivatives are second-order centered. Each residual
/// is divided by the largest `L²` norm among its terms, or by `‖η‖` on the
/// box when all terms vanish.
pub fn polar_residuals(sheet: &PhaseSheet, traj: &Trajectory, nl: &NonlinearitySpec) -> Result<PolarResiduals> {
    let (nt, nx) = (sheet.times.len(), sheet.nodes.len());
    if nt < 3 || nx < 3 {
        return Err(Error::BadBox("need at least 3×3 samples for the residuals".into()));
    }
    let grid = traj.grid();
    let h = grid.spacing();
    let radial = grid.dimension() == Dimension::Three;
    let mut res = [0.0; 2];
    let mut terms_a = [0.0; 3];
    let mut terms_b = [0.0; 4];
    let mut eta_norm = 0.0;
    for t in 1..nt - 1 {
        let dt2 = sheet.times[t + 1] - sheet.times[t - 1];
        for j in 1..nx - 1 {
            let r = sheet.coords[j];
            let eta = sheet.eta[t][j];
            let (eta_r, eta_rr) = space_derivs(&sheet.eta[t], j, h);
            let (th_r, th_rr) = space_derivs(&sheet.theta[t], j, h);
            let (lap_eta, lap_th) = if radial {
                (eta_rr + 2.0 * eta_r / r, th_rr + 2.0 * th_r / r)
            } else {
                (eta_rr, th_rr)
            };
            let eta_t = (sheet.eta[t + 1][j] - sheet.eta[t - 1][j]) / dt2;
            let th_t = (sheet.theta[t + 1][j] - sheet.theta[t - 1][j]) / dt2;

            let a = [eta_t, 2.0 * eta_r * th_r, eta * lap_th];
            res[0] += (a[0] - a[1] - a[2]).powi(2);
            let b = [-lap_eta, nl.eval(eta) * eta, th_t * eta, eta * th_r * th_r];
            res[1] += (b[0] + b[1] - b[2] + b[3]).powi(2);
            for (acc, v) in terms_a.iter_mut().zip(a) {
                *acc += v * v;
            }
            for (acc, v) in terms_b.iter_mut().zip(b) {
                *acc += v * v;
            }
            eta_norm += eta * eta;
        }
    }
    let norm = |terms: &[f64]| terms.iter().copied().fold(eta_norm, f64::max).sqrt();
    Ok(PolarResiduals {
        res_a: res[0].sqrt() / norm(&terms_a),
        res_b: res[1].sqrt() / norm(&terms_b),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSlope {
    /// `-slope` of `θ(r₀, t)`.
    pub e_hat: f64,
    /// `max_r |slope(r) - slope(r₀)|`.
    pub r_spread: f64,
    /// RMS misfit of the linear fit at the reference node.
    pub fit_residual: f64,
    /// The fit residual exceeds 10% of `|slope · duration|`.
    pub non_convergence: bool,
    /// The fit window is shorter than ten periods `2π/|E_hat|`.
    pub short_window: bool,
}

fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let icpt = ym - slope * tm;
    let rms = (t
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icpt - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, icpt, rms)
}

/// Phase slope over the second half of the box.
pub fn phase_slope(sheet: &PhaseSheet) -> Result<PhaseSlope> {
    phase_slope_window(sheet, 0.5)
}

/// Phase slope fitted over the final `fraction` of the box duration.
pub fn phase_slope_window(sheet: &PhaseSheet, fraction: f64) -> Result<PhaseSlope> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param("fraction", "must lie in (0, 1]"));
    }
    let t0 = *sheet.times.first().unwrap();
    let t1 = *sheet.times.last().unwrap();
    if !(t1 > t0) {
        return Err(Error::BadBox("phase slope needs a box of positive duration".into()));
    }
    let cut = t1 - fraction * (t1 - t0);
    let rows: Vec<usize> = (0..sheet.times.len())
        .filter(|&t| sheet.times[t] >= cut - 1e-12 * t1.abs().max(1.0))
        .collect();
    if rows.len() < 2 {
        return Err(Error::BadBox("fit window holds fewer than two samples".into()));
    }
    let times: Vec<f64> = rows.iter().map(|&t| sheet.times[t]).collect();
    let slope_at = |j: usize| {
        let y: Vec<f64> = rows.iter().map(|&t| sheet.theta[t][j]).collect();
        linear_fit(&times, &y)
    };
    let (s0, _, rms) = slope_at(sheet.reference_node);
    let r_spread = (0..sheet.nodes.len())
        .map(|j| (slope_at(j).0 - s0).abs())
        .fold(0.0, f64::max);
    let span = times.last().unwrap() - times[0];
    let e_hat = -s0;
    Ok(PhaseSlope {
        e_hat,
        r_spread,
        fit_residual: rms,
        non_convergence: rms > 0.1 * (s0 * span).abs(),
        short_window: e_hat == 0.0 || span < 10.0 * 2.0 * PI / e_hat.abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaAverage {
    /// `(1/T) ∫∫ φ θ̇ η²`.
    pub lhs: f64,
    /// `∫ ∇(φū)·∇ū + φ F(ū) ū²` with `ū` the time mean of `η` over the
    /// final quarter of the box.
    pub rhs: f64,
    /// `(1/T) ∫∫ φ η |∇θ|²`.
    pub lemma_term: f64,
    /// `(T, (1/T) ∫_0^T ∫ φ η |∇θ|²)` at every box time after the first.
    pub lemma_samples: Vec<(f64, f64)>,
}

/// Time-averaged weak form of the amplitude equation against a test
/// function `phi` sampled at the box nodes.
///
/// Multiplying `-Δη + F(η)η = θ̇η - η|∇θ|²` by `φη` and averaging gives
/// `lhs = rhs_T + lemma_term` up to time derivatives of order `1/T`; for a
/// converged soliton both sides tend to `-E ∫ φ u²`.
pub fn theta_average_identity(
    sheet: &PhaseSheet,
    traj: &Trajectory,
    nl: &NonlinearitySpec,
    phi: &[f64],
) -> Result<ThetaAverage> {
    let (nt, nx) = (sheet.times.len(), sheet.nodes.len());
    if phi.len() != nx {
        return Err(Error::param("phi", format!("{} samples for {nx} box nodes", phi.len())));
    }
    if nt < 3 || nx < 5 {
        return Err(Error::BadBox("box too small for the averaged identity".into()));
    }
    let margin_ok = phi[..2].iter().chain(&phi[nx - 2..]).all(|&v| v == 0.0);
    if !margin_ok {
        return Err(Error::param(
            "phi",
            "test function must vanish on the two outer nodes at each end",
        ));
    }
    let grid = traj.grid();
    let h = grid.spacing();
    let weight = |j: usize| -> f64 {
        match grid.dimension() {
            Dimension::One => h,
            Dimension::Three => 4.0 * PI * sheet.coords[j].powi(2) * h,
        }
    };
    let times = &sheet.times;
    let duration = times[nt - 1] - times[0];
    let theta_dot = |t: usize, j: usize| -> f64 {
        let th = &sheet.theta;
        if t == 0 {
            (-3.0 * th[0][j] + 4.0 * th[1][j] - th[2][j]) / (times[2] - times[0])
        } else if t == nt - 1 {
            (3.0 * th[t][j] - 4.0 * th[t - 1][j] + th[t - 2][j]) / (times[t] - times[t - 2])
        } else {
            (th[t + 1][j] - th[t - 1][j]) / (times[t + 1] - times[t - 1])
        }
    };
    let row_integral = |f: &dyn Fn(usize) -> f64| -> f64 { (0..nx).map(|j| weight(j) * f(j)).sum() };
    let mut lhs_rows = Vec::with_capacity(nt);
    let mut lemma_rows = Vec::with_capacity(nt);
    for t in 0..nt {
        lhs_rows.push(row_integral(&|j| phi[j] * theta_dot(t, j) * sheet.eta[t][j].powi(2)));
        lemma_rows.push(row_integral(&|j| {
            if phi[j] == 0.0 {
                return 0.0;
            }
            let (th_r, _) = space_derivs(&sheet.theta[t], j, h);
            phi[j] * sheet.eta[t][j] * th_r * th_r
        }));
    }
    let trapezoid = |rows: &[f64], upto: usize| -> f64 {
        (1..=upto)
            .map(|t| 0.5 * (times[t] - times[t - 1]) * (rows[t] + rows[t - 1]))
            .sum()
    };
    let lhs = trapezoid(&lhs_rows, nt - 1) / duration;
    let lemma_term = trapezoid(&lemma_rows, nt - 1) / duration;
    let lemma_samples = (1..nt)
        .map(|t| {
            let span = times[t] - times[0];
            (span, trapezoid(&lemma_rows, t) / span)
        })
        .collect();

    let late: Vec<usize> = (0..nt)
        .filter(|&t| times[t] >= times[nt - 1] - 0.25 * duration)
        .collect();
    let mut u_bar = vec![0.0; nx];
    for &t in &late {
        for j in 0..nx {
            u_bar[j] += sheet.eta[t][j] / late.len() as f64;
        }
    }
    let phi_u: Vec<f64> = phi.iter().zip(&u_bar).map(|(p, u)| p * u).collect();
    let rhs = (0..nx)
        .filter(|&j| j >= 1 && j + 1 < nx && phi[j] != 0.0)
        .map(|j| {
            let (d_phiu, _) = space_derivs(&phi_u, j, h);
            let (d_u, _) = space_derivs(&u_bar, j, h);
            weight(j) * (d_phiu * d_u + phi[j] * nl.eval(u_bar[j]) * u_bar[j] * u_bar[j])
        })
        .sum();
    Ok(ThetaAverage {
        lhs,
        rhs,
        lemma_term,
        lemma_samples,
    })
}

/// Default density floor: half the largest late-time amplitude.
pub fn default_delta(traj: &Trajectory) -> f64 {
    let last = traj.snapshots.last().map(|s| s.max_abs()).unwrap_or(0.0);
    0.5 * last
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_exact_on_polynomials() {
        let h = 0.1;
        // the edge stencils are second order, the bulk sixth order
        let quad: Vec<f64> = (0..10).map(|i| (i as f64 * h).powi(2)).collect();
        let sixth: Vec<f64> = (0..10).map(|i| (i as f64 * h).powi(6)).collect();
        for j in 1..9 {
            let x = j as f64 * h;
            let (d1, d2) = space_derivs(&quad, j, h);
            assert!((d1 - 2.0 * x).abs() < 1e-12, "j={j}");
            assert!((d2 - 2.0).abs() < 1e-10, "j={j}");
        }
        for j in 3..7 {
            let x = j as f64 * h;
            let (d1, d2) = space_derivs(&sixth, j, h);
            assert!((d1 - 6.0 * x.powi(5)).abs() < 1e-12, "j={j}");
            assert!((d2 - 30.0 * x.powi(4)).abs() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn fit_recovers_line() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = t.iter().map(|v| 2.0 - 0.7 * v).collect();
        let (s, c, rms) = linear_fit(&t, &y);
        assert!((s + 0.7).abs() < 1e-14 && (c - 2.0).abs() < 1e-13 && rms < 1e-13);
    }
}
