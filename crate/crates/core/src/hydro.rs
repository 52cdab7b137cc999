//! Hydrodynamic observables: amplitude, density, current, velocity, sphere
//! fluxes and the incoming-wave condition.
//!
//! `J = Im(ψ̄ ∇ψ)` and `ρ = |ψ|²` satisfy `ρ_t = -2 ∇·J`, so the mass inside
//! a ball changes by minus twice the time-integrated outward flux through its
//! surface. On the line the "sphere" of radius `R` is the pair `{-R, R}` and
//! the flux is `J(R) - J(-R)`; radially in 3D it is `4πR² J_r(R)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{nodes_in, Dimension, RadialGrid};
use crate::model::WaveField;
use crate::solver::{FluxLayout, Trajectory};
use crate::spectral::Spectral;

/// Default mask threshold relative to `max ρ`.
pub const EPS_ZERO_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroFrame {
    pub grid: RadialGrid,
    pub time: f64,
    pub eta: Vec<f64>,
    pub rho: Vec<f64>,
    /// `J` along `+x` on the line, `J_r` for radial fields.
    pub current: Vec<f64>,
    /// `J/ρ` off the zero set, `0` on it.
    pub velocity: Vec<f64>,
    pub zero_set_mask: Vec<bool>,
    pub eps_zero: f64,
}

impl HydroFrame {
    /// `r̂·J` at node `k` (`sign(x) J` on the line, zero at `x = 0`).
    pub fn radial_current(&self, k: usize) -> f64 {
        let x = self.grid.coord(k);
        match self.grid.dimension() {
            Dimension::Three => self.current[k],
            Dimension::One => {
                if x > 0.0 {
                    self.current[k]
                } else if x < 0.0 {
                    -self.current[k]
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether the support `{ρ ≥ 1e-8·max ρ}` is a single interval, i.e. the
    /// field has no interior node inside its bulk.
    pub fn is_nodeless(&self) -> bool {
        let max = self.rho.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return false;
        }
        let floor = 1e-8 * max;
        let inside: Vec<usize> = (0..self.rho.len()).filter(|&k| self.rho[k] >= floor).collect();
        inside.windows(2).all(|w| w[1] == w[0] + 1)
    }
}

/// `J = Im(ψ̄ ∂ψ) = a b' - b a'` for `ψ = a + ib`, with spectral derivatives
/// (even extension for radial fields). Real fields give exactly zero.
pub fn current_density(field: &WaveField) -> Vec<f64> {
    let sp = Spectral::new(&field.grid);
    let re: Vec<f64> = field.values.iter().map(|c| c.re).collect();
    let im: Vec<f64> = field.values.iter().map(|c| c.im).collect();
    let d_re = sp.derivative_real(&re);
    let d_im = sp.derivative_real(&im);
    (0..re.len()).map(|k| re[k] * d_im[k] - im[k] * d_re[k]).collect()
}

/// Hydrodynamic frame; `eps_zero = None` uses `1e-12 · max ρ`.
pub fn hydro_frame(field: &WaveField, eps_zero: Option<f64>) -> HydroFrame {
    let rho = field.density();
    let max_rho = rho.iter().copied().fold(0.0, f64::max);
    let eps = eps_zero.unwrap_or(EPS_ZERO_REL * max_rho);
    let current = current_density(field);
    let mask: Vec<bool> = rho.iter().map(|&r| r == 0.0 || r < eps).collect();
    let velocity = current
        .iter()
        .zip(&rho)
        .zip(&mask)
        .map(|((j, r), &m)| if m { 0.0 } else { j / r })
        .collect();
    HydroFrame {
        grid: field.grid,
        time: field.time,
        eta: rho.iter().map(|r| r.sqrt()).collect(),
        rho,
        current,
        velocity,
        zero_set_mask: mask,
        eps_zero: eps,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticSplit {
    /// `∫|∇ψ|²`.
    pub total: f64,
    /// `∫|∇η|²`.
    pub gradient: f64,
    /// `∫η² v²`.
    pub flow: f64,
}

impl KineticSplit {
    /// `|total - gradient - flow| / total` (absolute when `total = 0`).
    pub fn relative_error(&self) -> f64 {
        let err = (self.total - self.gradient - self.flow).abs();
        if self.total > 0.0 {
            err / self.total
        } else {
            err
        }
    }
}

/// Both sides of `∫|∇ψ|² = ∫|∇η|² + ∫η²v²` from one spectral derivative of
/// `ψ`. On `ρ > 0`, `∇η = Re(ψ̄∇ψ)/η` and `ηv = J/η`; differentiating `η`
/// itself loses resolution at deep minima of `|ψ|`, where `η` has a corner.
/// At a zero of `ψ` (the wall node of a radial grid) `v` is extended by 0
/// and `|∇η|` takes its one-sided limit `|∇ψ|`.
pub fn kinetic_splitting(field: &WaveField) -> KineticSplit {
    let grid = &field.grid;
    let spectral = Spectral::new(grid);
    let dpsi = spectral.derivative(&field.values);
    let total: Vec<f64> = dpsi.iter().map(|c| c.norm_sqr()).collect();
    let mut gradient = vec![0.0; total.len()];
    let mut flow = vec![0.0; total.len()];
    for (k, (psi, d)) in field.values.iter().zip(&dpsi).enumerate() {
        let rho = psi.norm_sqr();
        if rho > 0.0 {
            let p = psi.conj() * d;
            gradient[k] = p.re * p.re / rho;
            flow[k] = p.im * p.im / rho;
        } else {
            gradient[k] = d.norm_sqr();
        }
    }
    KineticSplit {
        total: grid.integrate(&total),
        gradient: grid.integrate(&gradient),
        flow: grid.integrate(&flow),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IwcStatus {
    /// `max_k r̂·J(x_k)`; non-positive under the incoming-wave condition.
    pub worst: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

/// Incoming-wave indicator with tolerance `1e-12 · max |r̂·J|`.
pub fn iwc_indicator(frame: &HydroFrame) -> IwcStatus {
    let scale = (0..frame.current.len())
        .map(|k| frame.radial_current(k).abs())
        .fold(0.0, f64::max);
    iwc_indicator_with_tol(frame, 1e-12 * scale)
}

pub fn iwc_indicator_with_tol(frame: &HydroFrame, tolerance: f64) -> IwcStatus {
    let worst = (0..frame.current.len())
        .map(|k| frame.radial_current(k))
        .reduce(f64::max)
        .unwrap_or(0.0);
    IwcStatus {
        worst,
        tolerance,
        satisfied: worst <= tolerance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CumulativeSource {
    /// Integrated inside the solver at every step.
    Exact,
    /// Trapezoid rule on the stored snapshots.
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSeries {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    /// Outward sphere flux `flux[t][R]`.
    pub flux: Vec<Vec<f64>>,
    /// `∫_0^t flux dt`.
    pub cumulative: Vec<Vec<f64>>,
    /// The same integral by the trapezoid rule on the snapshots.
    pub cumulative_trapezoid: Vec<Vec<f64>>,
    /// Mass inside the ball of radius `R`, `ball_mass[t][R]`.
    pub ball_mass: Vec<Vec<f64>>,
    pub source: CumulativeSource,
    /// Set when the flux changes by more than 10% of its range between
    /// consecutive snapshots somewhere, i.e. the stride is too coarse for
    /// the trapezoid rule.
    pub stride_warning: bool,
}

impl FluxSeries {
    /// `max_{t,R} |2·cumulative + Δ ball_mass|`: the discrete continuity
    /// balance `ρ_t = -2∇·J` integrated over balls and time.
    pub fn balance_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (t, row) in self.cumulative.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let dm = self.ball_mass[t][j] - self.ball_mass[0][j];
                worst = worst.max((2.0 * c + dm).abs());
            }
        }
        worst
    }

    /// `0 ≤ -cumulative ≤ mass0/2 + 1e-9` over the first `upto` snapshots.
    /// The lower bound allows rounding of `1e-12·mass0`.
    pub fn iwc_bound_holds(&self, mass0: f64, upto: usize) -> bool {
        self.cumulative
            .iter()
            .take(upto)
            .all(|row| row.iter().all(|&c| -c >= -1e-12 * mass0 && -c <= 0.5 * mass0 + 1e-9))
    }

    pub fn max_abs_flux(&self) -> f64 {
        self.flux.iter().flatten().map(|f| f.abs()).fold(0.0, f64::max)
    }

    /// Flux history at radius index `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.flux.iter().map(|row| row[j]).collect()
    }
}

fn check_radii(grid: &RadialGrid, radii: &[f64]) -> Result<()> {
    let (lo, hi) = match grid.dimension() {
        Dimension::One => (0.0, grid.r_max()),
        Dimension::Three => (0.0, grid.r_max()),
    };
    for &r in radii {
        if !(r > lo && r <= hi) {
            return Err(Error::RadiusOutside { radius: r, lo, hi });
        }
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("radii", "must be strictly increasing"));
    }
    Ok(())
}

/// Piecewise-linear interpolation on the radial faces `(K + ½)Δ`,
/// `K = -1, 0, …, N-2`, where `values[K + 1]` belongs to face `K`.
fn face_interp(values: &[f64], spacing: f64, r: f64) -> f64 {
    let pos = r / spacing + 0.5;
    let last = values.len() - 1;
    if pos >= last as f64 {
        return values[last];
    }
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    values[i] * (1.0 - f) + values[i + 1] * f
}

/// Per-snapshot quantities at one time: flux at each radius and ball masses.
fn instantaneous(field: &WaveField, radii: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let grid = &field.grid;
    let j = current_density(field);
    let rho = field.density();
    match grid.dimension() {
        Dimension::One => {
            let sp = Spectral::new(grid);
            let js = sp.line_spectrum(&j);
            let rs = sp.line_spectrum(&rho);
            let total = grid.integrate(&rho);
            let flux = radii.iter().map(|&r| js.eval(r) - js.eval(-r)).collect();
            let mass = radii
                .iter()
                .map(|&r| if r >= grid.r_max() { total } else { rs.integral(-r, r) })
                .collect();
            (flux, mass)
        }
        Dimension::Three => {
            let h = grid.spacing();
            let n = grid.len();
            // cumulative ball masses at faces, the discrete mass the solver conserves
            let mut faces = Vec::with_capacity(n);
            faces.push(0.0);
            let mut acc = 0.0;
            for k in 0..n - 1 {
                acc += grid.weight(k) * rho[k];
                faces.push(acc);
            }
            let flux = radii
                .iter()
                .map(|&r| {
                    if r >= grid.r_max() {
                        return 0.0;
                    }
                    let k = ((r / h).floor() as usize).min(n - 2);
                    let f = r / h - k as f64;
                    let jr = j[k] * (1.0 - f) + j[k + 1] * f;
                    4.0 * std::f64::consts::PI * r * r * jr
                })
                .collect();
            let mass = radii.iter().map(|&r| face_interp(&faces, h, r)).collect();
            (flux, mass)
        }
    }
}

/// Sphere fluxes, their time integrals and the ball masses at `radii`.
///
/// When the trajectory carries a flux record the cumulative flux is the
/// solver's own time integral of its discrete current, which makes the
/// mass balance hold to rounding; otherwise it falls back to the
/// trapezoid rule on the snapshots.
pub fn flux_series(traj: &Trajectory, radii: &[f64]) -> Result<FluxSeries> {
    let grid = *traj.grid();
    check_radii(&grid, radii)?;
    let times = traj.times();
    let mut flux = Vec::with_capacity(times.len());
    let mut ball_mass = Vec::with_capacity(times.len());
    for snap in &traj.snapshots {
        let (f, m) = instantaneous(snap, radii);
        flux.push(f);
        ball_mass.push(m);
    }
    let mut trapezoid = vec![vec![0.0; radii.len()]];
    for t in 1..times.len() {
        let dt = times[t] - times[t - 1];
        let row = (0..radii.len())
            .map(|j| trapezoid[t - 1][j] + 0.5 * dt * (flux[t - 1][j] + flux[t][j]))
            .collect();
        trapezoid.push(row);
    }
    let (cumulative, source) = match &traj.flux_record {
        Some(rec) => {
            let rows = rec
                .integrated
                .iter()
                .map(|acc| match rec.layout {
                    FluxLayout::Nodes => {
                        let s = Spectral::new(&grid).line_spectrum(acc);
                        radii
                            .iter()
                            .map(|&r| if r >= grid.r_max() { 0.0 } else { s.eval(r) - s.eval(-r) })
                            .collect()
                    }
                    FluxLayout::Faces => {
                        let mut faces = Vec::with_capacity(acc.len() + 1);
                        faces.push(0.0);
                        faces.extend_from_slice(acc);
                        radii.iter().map(|&r| face_interp(&faces, grid.spacing(), r)).collect()
                    }
                })
                .collect();
            (rows, CumulativeSource::Exact)
        }
        None => (trapezoid.clone(), CumulativeSource::Trapezoid),
    };
    let mut stride_warning = false;
    for j in 0..radii.len() {
        let col: Vec<f64> = flux.iter().map(|row| row[j]).collect();
        let range = col.iter().map(|f| f.abs()).fold(0.0, f64::max);
        if range > 0.0 && col.windows(2).any(|w| (w[1] - w[0]).abs() > 0.1 * range) {
            stride_warning = true;
        }
    }
    if stride_warning && source == CumulativeSource::Trapezoid {
        log::warn!("flux changes by more than 10% between snapshots; the trapezoid integral is coarse");
    }
    Ok(FluxSeries {
        radii: radii.to_vec(),
        times,
        flux,
        cumulative,
        cumulative_trapezoid: trapezoid,
        ball_mass,
        source,
        stride_warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxLimitReport {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub inner_sup: f64,
    pub outer_sup: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Flux through the smallest and largest sampled spheres, against
/// `rel_tol · max |flux|` over the whole series.
pub fn flux_limit_checks(series: &FluxSeries, rel_tol: f64) -> Result<FluxLimitReport> {
    if series.radii.is_empty() || series.flux.is_empty() {
        return Err(Error::param("series", "empty flux series"));
    }
    let last = series.radii.len() - 1;
    let sup = |j: usize| series.column(j).iter().map(|f| f.abs()).fold(0.0, f64::max);
    let tolerance = rel_tol * series.max_abs_flux();
    let (inner_sup, outer_sup) = (sup(0), sup(last));
    Ok(FluxLimitReport {
        inner_radius: series.radii[0],
        outer_radius: series.radii[last],
        inner_sup,
        outer_sup,
        tolerance,
        passed: inner_sup <= tolerance && outer_sup <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityDecay {
    pub times: Vec<f64>,
    /// `‖χ_I v‖_{L²}` per snapshot.
    pub norms: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub min_eta: f64,
    pub floor_violated: bool,
}

/// `L²(I)` norm of the velocity per snapshot, with its running time mean.
pub fn velocity_decay_on_interval(traj: &Trajectory, interval: (f64, f64), delta: f64) -> Result<VelocityDecay> {
    let grid = traj.grid();
    let (lo, hi) = interval;
    if !(lo < hi && lo >= grid.r_min() && hi <= grid.r_max()) {
        return Err(Error::RadiusOutside {
            radius: if lo < grid.r_min() { lo } else { hi },
            lo: grid.r_min(),
            hi: grid.r_max(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::param("delta", "must be > 0"));
    }
    let nodes = nodes_in(grid, lo, hi);
    let mut norms = Vec::with_capacity(traj.len());
    let mut min_eta = f64::INFINITY;
    for snap in &traj.snapshots {
        let frame = hydro_frame(snap, None);
        let mut acc = 0.0;
        for k in nodes.clone() {
            acc += grid.weight(k) * frame.velocity[k].powi(2);
            min_eta = min_eta.min(frame.eta[k]);
        }
        norms.push(acc.sqrt());
    }
    let times = traj.times();
    let mut running_mean = Vec::with_capacity(norms.len());
    let mut integral = 0.0;
    for t in 0..norms.len() {
        if t == 0 {
            running_mean.push(norms[0]);
            continue;
        }
        integral += 0.5 * (times[t] - times[t - 1]) * (norms[t] + norms[t - 1]);
        running_mean.push(integral / (times[t] - times[0]));
    }
    if !min_eta.is_finite() {
        min_eta = 0.0;
    }
    Ok(VelocityDecay {
        times,
        norms,
        running_mean,
        min_eta,
        floor_violated: min_eta < delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_initial_condition, Recipe};

    fn lens(b: f64) -> WaveField {
        let grid = RadialGrid::line(20.0, 512).unwrap();
        let recipe = Recipe::GaussianLens {
            amplitude: 1.0,
            width: 1.0,
            focusing: b,
        };
        make_initial_condition(&recipe, &grid).unwrap()
    }

    #[test]
    fn real_field_has_no_current() {
        let f = hydro_frame(&lens(0.0), None);
        assert!(f.current.iter().all(|j| j.abs() < 1e-15));
        assert!(f.velocity.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn lens_current_is_incoming() {
        let field = lens(0.5);
        let f = hydro_frame(&field, None);
        for k in 0..field.grid.len() {
            let x = field.grid.coord(k);
            let exact = -2.0 * 0.5 * x * f.rho[k];
            assert!((f.current[k] - exact).abs() < 1e-12, "x={x}");
        }
        let s = iwc_indicator(&f);
        assert!(s.satisfied);
    }

    #[test]
    fn zero_field_indicator() {
        let grid = RadialGrid::line(20.0, 64).unwrap();
        let f = hydro_frame(&WaveField::zeros(grid), None);
        let s = iwc_indicator(&f);
        assert_eq!(s.worst, 0.0);
        assert!(s.satisfied);
        assert!(f.zero_set_mask.iter().all(|&m| m));
    }

    #[test]
    fn face_interpolation() {
        let v = [0.0, 1.0, 3.0];
        assert_eq!(face_interp(&v, 1.0, 0.5), 1.0);
        assert_eq!(face_interp(&v, 1.0, 1.0), 2.0);
        assert_eq!(face_interp(&v, 1.0, 5.0), 3.0);
    }
}
