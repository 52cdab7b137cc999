//! Time stepping.
//!
//! Line fields use Strang split-step Fourier; radial 3D fields use
//! Crank–Nicolson on `w = rψ` with a Picard-iterated, energy-conserving
//! nonlinear average. Both can accumulate the exact time integral of the
//! discrete current between snapshots (see [`FluxRecord`]).

mod crank_nicolson;
mod split_step;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Dimension, RadialGrid};
use crate::model::{conserved_set, ConservedSet, NonlinearitySpec, WaveField};

use crank_nicolson::CrankNicolson;
use split_step::SplitStep;

/// Relative mass drift treated as blow-up.
pub const BLOW_UP_DRIFT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SplitStepFourier,
    CrankNicolsonRadial,
}

impl Method {
    pub fn for_dimension(dim: Dimension) -> Self {
        match dim {
            Dimension::One => Method::SplitStepFourier,
            Dimension::Three => Method::CrankNicolsonRadial,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Method::SplitStepFourier => "split_step_fourier",
            Method::CrankNicolsonRadial => "crank_nicolson_radial",
        }
    }

    fn check(self, grid: &RadialGrid) -> Result<()> {
        if Method::for_dimension(grid.dimension()) == self {
            Ok(())
        } else {
            Err(Error::MethodMismatch {
                method: self.name(),
                dimension: grid.dimension().value(),
            })
        }
    }
}

/// Cosine-ramp absorbing layer next to the outer boundary.
///
/// Damps `ψ` by `exp(-strength · ramp(r) · dt)` each step, where the ramp
/// rises from 0 to 1 over the outer `width` of the domain. Breaks exact
/// conservation, so it is off unless asked for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sponge {
    pub width: f64,
    pub strength: f64,
}

impl Sponge {
    fn profile(&self, grid: &RadialGrid) -> Vec<f64> {
        let edge = grid.r_max();
        grid.coords()
            .iter()
            .map(|&x| {
                let depth = x.abs() - (edge - self.width);
                if depth <= 0.0 {
                    0.0
                } else {
                    let s = (depth / self.width).min(1.0);
                    self.strength * 0.5 * (1.0 - (std::f64::consts::PI * s).cos())
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub dt: f64,
    pub t_final: f64,
    /// Steps between stored snapshots.
    pub output_stride: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub sponge: Option<Sponge>,
    /// Accumulate the time-integrated discrete current alongside the run.
    pub track_flux: bool,
}

impl SolverConfig {
    pub fn new(method: Method, dt: f64, t_final: f64, output_stride: usize) -> Self {
        Self {
            method,
            dt,
            t_final,
            output_stride,
            picard_tol: 1e-12,
            picard_max_iter: 50,
            sponge: None,
            track_flux: true,
        }
    }

    pub fn num_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn validate(&self, grid: &RadialGrid) -> Result<()> {
        self.method.check(grid)?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::param("t_final", format!("must be > 0, got {}", self.t_final)));
        }
        let steps = self.t_final / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::param(
                "t_final",
                format!("{} is not a whole number of steps of {}", self.t_final, self.dt),
            ));
        }
        if self.output_stride == 0 {
            return Err(Error::param("output_stride", "must be >= 1"));
        }
        if self.num_steps() % self.output_stride != 0 {
            return Err(Error::param(
                "output_stride",
                format!(
                    "{} steps are not a multiple of the stride {}",
                    self.num_steps(),
                    self.output_stride
                ),
            ));
        }
        if !(self.picard_tol > 0.0 && self.picard_tol <= 1e-6) {
            return Err(Error::param("picard_tol", "must lie in (0, 1e-6]"));
        }
        if self.picard_max_iter < 3 {
            return Err(Error::param("picard_max_iter", "must be >= 3"));
        }
        if let Some(s) = self.sponge {
            if !(s.width > 0.0 && s.width < grid.r_max() && s.strength >= 0.0) {
                return Err(Error::param("sponge", "width must lie in (0, r_max) and strength >= 0"));
            }
        }
        if self.method == Method::CrankNicolsonRadial {
            let limit = 0.5 * grid.spacing().powi(2);
            if self.dt > limit {
                log::warn!(
                    "dt = {} exceeds the advisory Crank-Nicolson margin 0.5*dr^2 = {limit:e}",
                    self.dt
                );
            }
        }
        Ok(())
    }
}

/// Where the integrated current lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FluxLayout {
    /// `∫ J(x_k) dt` at every line node.
    Nodes,
    /// `∫ 4π Im(m̄_k m_{k+1})/Δ dt` on the face between radial nodes `k`
    /// and `k+1`: the discrete `4π r² J_r`, with `m` the Crank–Nicolson
    /// midpoint state.
    Faces,
}

/// Time integrals of the discrete current from `t = 0` to each snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxRecord {
    pub layout: FluxLayout,
    pub integrated: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<WaveField>,
    pub conserved: Vec<ConservedSet>,
    /// `|mass(t) - mass(0)| / mass(0)` per snapshot (0 for the zero field).
    pub mass_drift: Vec<f64>,
    pub flux_record: Option<FluxRecord>,
    pub nonlinearity: NonlinearitySpec,
    pub dt: f64,
    pub output_stride: usize,
}

impl Trajectory {
    pub fn grid(&self) -> &RadialGrid {
        &self.snapshots[0].grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn initial_mass(&self) -> f64 {
        self.conserved[0].mass
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.mass_drift.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `|E(t) - E(0)|`, relative to `|E(0)|` when that is nonzero.
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.conserved[0].energy;
        let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
        self.conserved
            .iter()
            .map(|c| (c.energy - e0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Build a trajectory from externally supplied snapshots (no flux record).
    pub fn from_snapshots(
        snapshots: Vec<WaveField>,
        nl: NonlinearitySpec,
        dt: f64,
        output_stride: usize,
    ) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::param("snapshots", "empty"));
        }
        if snapshots.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(Error::param("snapshots", "time stamps must increase strictly"));
        }
        let conserved = snapshots
            .iter()
            .map(|s| conserved_set(s, &nl))
            .collect::<Result<Vec<_>>>()?;
        let m0 = conserved[0].mass;
        let mass_drift = conserved.iter().map(|c| relative_drift(c.mass, m0)).collect();
        Ok(Self {
            snapshots,
            conserved,
            mass_drift,
            flux_record: None,
            nonlinearity: nl,
            dt,
            output_stride,
        })
    }
}

fn relative_drift(m: f64, m0: f64) -> f64 {
    if m0 > 0.0 {
        (m - m0).abs() / m0
    } else {
        m.abs()
    }
}

enum Propagator {
    Split(SplitStep),
    Crank(CrankNicolson),
}

impl Propagator {
    fn new(initial: &WaveField, nl: &NonlinearitySpec, cfg: &SolverConfig) -> Self {
        match cfg.method {
            Method::SplitStepFourier => Propagator::Split(SplitStep::new(initial, *nl, cfg)),
            Method::CrankNicolsonRadial => Propagator::Crank(CrankNicolson::new(initial, *nl, cfg)),
        }
    }

    fn advance(&mut self, step: usize, flux: Option<&mut [f64]>) -> Result<()> {
        match self {
            Propagator::Split(p) => {
                p.advance(flux);
                Ok(())
            }
            Propagator::Crank(p) => p.advance(step, flux),
        }
    }

    fn field(&self, time: f64) -> WaveField {
        match self {
            Propagator::Split(p) => p.field(time),
            Propagator::Crank(p) => p.field(time),
        }
    }

    /// Mass by the grid quadrature, without building a snapshot.
    fn mass(&self) -> f64 {
        match self {
            Propagator::Split(p) => p.mass(),
            Propagator::Crank(p) => p.mass(),
        }
    }

    fn flux_len(&self) -> usize {
        match self {
            Propagator::Split(p) => p.len(),
            Propagator::Crank(p) => p.len() - 1,
        }
    }
}

fn layout_for(method: Method) -> FluxLayout {
    match method {
        Method::SplitStepFourier => FluxLayout::Nodes,
        Method::CrankNicolsonRadial => FluxLayout::Faces,
    }
}

pub fn evolve(initial: &WaveField, nl: &NonlinearitySpec, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate(&initial.grid)?;
    if !initial.is_finite() {
        return Err(Error::NonFinite("initial field"));
    }
    let mut prop = Propagator::new(initial, nl, cfg);
    let steps = cfg.num_steps();
    let mut snapshots = vec![prop.field(initial.time)];
    let mut conserved = vec![conserved_set(&snapshots[0], nl)?];
    let m0 = conserved[0].mass;
    let mut mass_drift = vec![0.0];
    let mut acc = cfg.track_flux.then(|| vec![0.0; prop.flux_len()]);
    let mut record = cfg.track_flux.then(|| vec![vec![0.0; prop.flux_len()]]);

    for step in 1..=steps {
        prop.advance(step, acc.as_deref_mut())?;
        let time = initial.time + step as f64 * cfg.dt;
        let mass = prop.mass();
        if !mass.is_finite() {
            return Err(Error::BlowUp {
                step,
                time,
                reason: "non-finite field values".into(),
            });
        }
        let drift = relative_drift(mass, m0);
        if cfg.sponge.is_none() && drift > BLOW_UP_DRIFT {
            return Err(Error::BlowUp {
                step,
                time,
                reason: format!("relative mass drift {drift:e}"),
            });
        }
        if step % cfg.output_stride == 0 {
            let snap = prop.field(time);
            conserved.push(conserved_set(&snap, nl).map_err(|_| Error::BlowUp {
                step,
                time,
                reason: "non-finite conserved quantities".into(),
            })?);
            mass_drift.push(drift);
            snapshots.push(snap);
            if let (Some(rec), Some(a)) = (record.as_mut(), acc.as_ref()) {
                rec.push(a.clone());
            }
        }
    }
    log::debug!("evolved {steps} steps, {} snapshots", snapshots.len());
    Ok(Trajectory {
        snapshots,
        conserved,
        mass_drift,
        flux_record: record.map(|integrated| FluxRecord {
            layout: layout_for(cfg.method),
            integrated,
        }),
        nonlinearity: *nl,
        dt: cfg.dt,
        output_stride: cfg.output_stride,
    })
}

/// A single step of `method`; bit-identical for identical inputs.
pub fn step_once(field: &WaveField, nl: &NonlinearitySpec, dt: f64, method: Method) -> Result<WaveField> {
    let cfg = SolverConfig {
        track_flux: false,
        ..SolverConfig::new(method, dt, dt, 1)
    };
    cfg.validate(&field.grid)?;
    if !field.is_finite() {
        return Err(Error::NonFinite("field"));
    }
    let mut prop = Propagator::new(field, nl, &cfg);
    prop.advance(1, None)?;
    let out = prop.field(field.time + dt);
    if !out.is_finite() {
        return Err(Error::BlowUp {
            step: 1,
            time: out.time,
            reason: "non-finite field values".into(),
        });
    }
    Ok(out)
}

pub(crate) fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}
