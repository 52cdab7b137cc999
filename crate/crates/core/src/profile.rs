//! Ground states of `-Δu + F(u)u = -E u` and distances to them.
//!
//! On the line the cubic case has the closed form `√(2E/|c|) sech(√E x)`;
//! everything else is found by shooting from the origin and bisecting the
//! initial amplitude between trajectories that turn back up (too small) and
//! trajectories that cross zero (too large).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{nodes_in, Dimension, RadialGrid};
use crate::model::NonlinearitySpec;
use crate::spectral::Spectral;

/// RK4 substeps per grid spacing.
const SUBSTEPS: usize = 4;
const BRACKET: (f64, f64) = (1e-6, 1e3);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonProfile {
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    /// `u'(r)` (`u'(x)` on the line) at the grid nodes.
    pub du: Vec<f64>,
    pub energy_param: f64,
    pub ode_residual: f64,
    pub node_count: usize,
    pub u0: f64,
}

impl SolitonProfile {
    pub fn h1_norm(&self) -> f64 {
        let v: Vec<f64> = self.u.iter().zip(&self.du).map(|(u, d)| u * u + d * d).collect();
        self.grid.integrate(&v).sqrt()
    }
}

fn check_inputs(energy: f64, nl: &NonlinearitySpec) -> Result<()> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::param("E", format!("must be > 0, got {energy}")));
    }
    if !(nl.coefficient < 0.0) {
        return Err(Error::param(
            "coefficient",
            "ground states need a focusing nonlinearity (coefficient < 0)",
        ));
    }
    Ok(())
}

/// Line ground state: closed form for the cubic case, shooting otherwise.
pub fn solve_profile_1d(energy: f64, nl: &NonlinearitySpec, grid: &RadialGrid) -> Result<SolitonProfile> {
    check_inputs(energy, nl)?;
    if grid.dimension() != Dimension::One {
        return Err(Error::Grid("solve_profile_1d needs a line grid".into()));
    }
    if nl.is_cubic() {
        Ok(sech_closed_form(energy, nl, grid))
    } else {
        shoot_profile(energy, nl, grid)
    }
}

/// Radial ground state in three dimensions, by shooting.
pub fn solve_profile_3d(energy: f64, nl: &NonlinearitySpec, grid: &RadialGrid) -> Result<SolitonProfile> {
    check_inputs(energy, nl)?;
    if grid.dimension() != Dimension::Three {
        return Err(Error::Grid("solve_profile_3d needs a radial grid".into()));
    }
    if nl.power >= 4.0 {
        return Err(Error::Unsupported(format!(
            "power {} is not energy-subcritical in three dimensions",
            nl.power
        )));
    }
    shoot_profile(energy, nl, grid)
}

fn sech_closed_form(energy: f64, nl: &NonlinearitySpec, grid: &RadialGrid) -> SolitonProfile {
    let amp = (2.0 * energy / nl.coefficient.abs()).sqrt();
    let k = energy.sqrt();
    let mut u = Vec::with_capacity(grid.len());
    let mut du = Vec::with_capacity(grid.len());
    let mut residual: f64 = 0.0;
    for x in grid.coords() {
        let sech = 1.0 / (k * x).cosh();
        let val = amp * sech;
        let d = -k * val * (k * x).tanh();
        let d2 = k * k * val * (1.0 - 2.0 * sech * sech);
        residual = residual.max((-d2 + nl.eval(val) * val + energy * val).abs());
        u.push(val);
        du.push(d);
    }
    SolitonProfile {
        grid: *grid,
        u,
        du,
        energy_param: energy,
        ode_residual: residual,
        node_count: 0,
        u0: amp,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fate {
    /// Turned back up while still positive: initial amplitude too small.
    Under,
    /// Crossed zero (or blew up): initial amplitude too large.
    Over,
    /// Neither happened before the end of the domain.
    Undecided,
}

struct Shooter {
    /// `n - 1`.
    curvature: f64,
    energy: f64,
    nl: NonlinearitySpec,
    dr: f64,
    substeps: usize,
    /// Number of sample points `r = j·spacing`, `j = 0..samples`.
    samples: usize,
}

impl Shooter {
    fn rhs(&self, r: f64, u: f64, du: f64) -> (f64, f64) {
        let f = self.energy * u + self.nl.eval(u.abs()) * u;
        let d2 = if r == 0.0 {
            f / (self.curvature + 1.0)
        } else {
            f - self.curvature / r * du
        };
        (du, d2)
    }

    fn step(&self, r: f64, u: f64, du: f64) -> (f64, f64) {
        let h = self.dr;
        let (k1u, k1d) = self.rhs(r, u, du);
        let (k2u, k2d) = self.rhs(r + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1d);
        let (k3u, k3d) = self.rhs(r + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2d);
        let (k4u, k4d) = self.rhs(r + h, u + h * k3u, du + h * k3d);
        (
            u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            du + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
        )
    }

    /// Integrate from `u(0) = a`, `u'(0) = 0`; returns the fate and the
    /// `(u, u')` samples at the grid radii reached before it was decided.
    fn run(&self, a: f64, record: bool) -> (Fate, Vec<(f64, f64)>) {
        let mut out = Vec::new();
        // Below the constant equilibrium u'' starts positive; far above the
        // ground state the step cannot resolve the core and RK4 goes unstable.
        if self.energy + self.nl.eval(a) >= 0.0 {
            return (Fate::Under, out);
        }
        if self.nl.eval(a).abs() * self.dr * self.dr > 0.1 {
            return (Fate::Over, out);
        }
        let (mut u, mut du) = (a, 0.0);
        if record {
            out.push((u, du));
        }
        let total = (self.samples - 1) * self.substeps;
        for i in 0..total {
            let r = i as f64 * self.dr;
            (u, du) = self.step(r, u, du);
            if !(u.is_finite() && du.is_finite()) || u < 0.0 {
                return (Fate::Over, out);
            }
            if du > 0.0 {
                return (Fate::Under, out);
            }
            if record && (i + 1) % self.substeps == 0 {
                out.push((u, du));
            }
        }
        (Fate::Undecided, out)
    }
}

/// Largest relative gap between the bracketing shots that still counts as
/// the profile; past it the linear decay takes over.
const SPLICE_TOL: f64 = 1e-8;

/// Decay exponent `√E·r` the shots are carried to.
const TAIL_EXPONENT: f64 = 50.0;

struct Shot {
    u0: f64,
    /// Reliable samples `(u, u')` at `r = j·spacing`; the tail beyond is
    /// filled in from the linear decay.
    core: Vec<(f64, f64)>,
}

fn shoot(
    energy: f64,
    nl: &NonlinearitySpec,
    dim: Dimension,
    spacing: f64,
    samples: usize,
    substeps: usize,
) -> Result<Shot> {
    let shooter = Shooter {
        curvature: dim.value() as f64 - 1.0,
        energy,
        nl: *nl,
        dr: spacing / substeps as f64,
        substeps,
        // run well past the domain edge so the bracketing shots separate
        samples: samples.max((TAIL_EXPONENT / (energy.sqrt() * spacing)).ceil() as usize),
    };
    let (mut lo, mut hi) = BRACKET;
    if shooter.run(lo, false).0 != Fate::Under || shooter.run(hi, false).0 != Fate::Over {
        return Err(Error::NoBracket(format!(
            "no ground state with u(0) in [{lo:e}, {hi:e}] for E = {energy}"
        )));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shooter.run(mid, false).0 {
            Fate::Under => lo = mid,
            Fate::Over => hi = mid,
            Fate::Undecided => {
                lo = mid;
                hi = mid;
                break;
            }
        }
    }
    let (_, a) = shooter.run(lo, true);
    let (_, b) = shooter.run(hi, true);
    let mut cut = a.len().min(b.len());
    for j in 1..cut {
        if (a[j].0 - b[j].0).abs() > SPLICE_TOL * a[j].0.abs().max(1e-300) {
            cut = j;
            break;
        }
    }
    // Keep only the part where both trajectories still decrease.
    cut = cut.saturating_sub(1);
    if cut < 4 {
        return Err(Error::Shooting(format!(
            "trajectories separate within {cut} grid spacings; refine the grid"
        )));
    }
    let core = a[..cut]
        .iter()
        .zip(&b[..cut])
        .map(|(p, q)| (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1)))
        .collect();
    Ok(Shot {
        u0: 0.5 * (lo + hi),
        core,
    })
}

/// Sample `u` and `u'` at radius index `j` (radius `j·spacing`).
fn radial_sample(shot: &Shot, j: usize, spacing: f64, energy: f64, dim: Dimension) -> (f64, f64) {
    if j < shot.core.len() {
        return shot.core[j];
    }
    let jc = shot.core.len() - 1;
    let rc = jc as f64 * spacing;
    let r = j as f64 * spacing;
    let uc = shot.core[jc].0;
    let k = energy.sqrt();
    match dim {
        Dimension::One => {
            let u = uc * (-k * (r - rc)).exp();
            (u, -k * u)
        }
        Dimension::Three => {
            let u = uc * rc / r * (-k * (r - rc)).exp();
            (u, -(k + 1.0 / r) * u)
        }
    }
}

fn radial_index(grid: &RadialGrid, k: usize) -> usize {
    (grid.coord(k).abs() / grid.spacing()).round() as usize
}

/// Solve the profile ODE by shooting regardless of closed forms.
pub fn shoot_profile(energy: f64, nl: &NonlinearitySpec, grid: &RadialGrid) -> Result<SolitonProfile> {
    check_inputs(energy, nl)?;
    let dim = grid.dimension();
    let samples = (0..grid.len()).map(|k| radial_index(grid, k)).max().unwrap_or(0) + 1;
    let spacing = grid.spacing();
    let fine = shoot(energy, nl, dim, spacing, samples, SUBSTEPS)?;
    let coarse = shoot(energy, nl, dim, spacing, samples, SUBSTEPS / 2)?;
    let overlap = fine.core.len().min(coarse.core.len());
    let ode_residual = (0..overlap)
        .map(|j| (fine.core[j].0 - coarse.core[j].0).abs())
        .fold(0.0, f64::max)
        / 15.0;
    // Richardson: the fourth-order error of the fine run is removed, so
    // the returned samples are well inside the reported residual.
    let fine = Shot {
        u0: fine.u0,
        core: (0..overlap)
            .map(|j| {
                let (f, c) = (fine.core[j], coarse.core[j]);
                (f.0 + (f.0 - c.0) / 15.0, f.1 + (f.1 - c.1) / 15.0)
            })
            .collect(),
    };

    let mut u = Vec::with_capacity(grid.len());
    let mut du = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let (val, d) = radial_sample(&fine, radial_index(grid, k), spacing, energy, dim);
        u.push(val);
        // on the line u is even: u'(x) = sign(x) u'(|x|)
        du.push(if grid.coord(k) < 0.0 { -d } else { d });
    }
    let node_count =
        u.windows(2).filter(|w| w[0] * w[1] < 0.0).count() + u.iter().filter(|&&v| v <= 0.0).count().min(1);
    if node_count > 0 {
        return Err(Error::Shooting(format!("profile has {node_count} nodes")));
    }
    if let Some(&tail) = u.last() {
        if tail > 1e-10 * fine.u0 {
            log::warn!("profile tail {tail:e} at the domain edge; the domain is short for E = {energy}");
        }
    }
    Ok(SolitonProfile {
        grid: *grid,
        u,
        du,
        energy_param: energy,
        ode_residual,
        node_count,
        u0: fine.u0,
    })
}

/// Smooth bump `exp(-1/(1-s²))` on `|s| < 1` with its first two derivatives.
pub fn bump(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = (-1.0 / q).exp();
    (b, -2.0 * s / (q * q) * b, (6.0 * s.powi(4) - 2.0) / q.powi(4) * b)
}

/// One test function of the weak-form battery: `bump((r - center)/width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestBump {
    pub center: f64,
    pub width: f64,
}

impl TestBump {
    /// `(φ, φ', Δφ)` at coordinate `x` of a grid of dimension `dim`.
    pub fn eval(&self, x: f64, dim: Dimension) -> (f64, f64, f64) {
        let (b, db, d2b) = bump((x - self.center) / self.width);
        let d1 = db / self.width;
        let d2 = d2b / (self.width * self.width);
        let lap = match dim {
            Dimension::One => d2,
            Dimension::Three => {
                if x == 0.0 {
                    3.0 * d2
                } else {
                    d2 + 2.0 * d1 / x
                }
            }
        };
        (b, d1, lap)
    }
}

/// Eight bumps spread over the core of a profile with energy `E`. Their
/// supports stay off the origin so they are smooth radial functions in 3D.
pub fn bump_battery(energy: f64, dim: Dimension) -> Vec<TestBump> {
    let len = 1.0 / energy.sqrt();
    (0..8)
        .map(|j| {
            let c = len * (1.2 + 0.6 * j as f64);
            let sign = if dim == Dimension::One && j % 2 == 1 { -1.0 } else { 1.0 };
            TestBump {
                center: sign * c,
                width: len,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub bump: TestBump,
    /// `(-Δφ, u) + (φ, F(u)u) + E(φ, u)`.
    pub residual: f64,
    /// `‖φ‖_{H¹} ‖u‖_{H¹}`.
    pub scale: f64,
}

impl WeakResidual {
    pub fn ratio(&self) -> f64 {
        self.residual.abs() / self.scale
    }
}

/// Oversampling of the profile for the weak-form pairings: a bump has a
/// slowly decaying spectrum, so its second derivative needs a finer
/// quadrature than the profile itself.
const WEAK_REFINE: usize = 8;

pub fn weak_residuals(profile: &SolitonProfile, nl: &NonlinearitySpec) -> Vec<WeakResidual> {
    let grid = &profile.grid;
    let dim = grid.dimension();
    let u_h1 = profile.h1_norm();
    let u = Spectral::new(grid).refine(&profile.u, WEAK_REFINE);
    let h = grid.spacing() / WEAK_REFINE as f64;
    let nodes: Vec<(f64, f64)> = (0..u.len())
        .map(|j| {
            let x = grid.r_min() + j as f64 * h;
            let w = match dim {
                Dimension::One => h,
                Dimension::Three => 4.0 * std::f64::consts::PI * x * x * h,
            };
            (x, w)
        })
        .collect();
    bump_battery(profile.energy_param, dim)
        .into_iter()
        .map(|b| {
            let (mut pair, mut h1) = (0.0, 0.0);
            for (&(x, w), &u) in nodes.iter().zip(&u) {
                let (phi, dphi, lap) = b.eval(x, dim);
                if phi == 0.0 {
                    continue;
                }
                pair += w * (-lap * u + phi * nl.eval(u.abs()) * u + profile.energy_param * phi * u);
                h1 += w * (phi * phi + dphi * dphi);
            }
            WeakResidual {
                bump: b,
                residual: pair,
                scale: h1.sqrt() * u_h1,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceNorm {
    L2,
    Hs(f64),
    Sup,
}

fn check_interval(grid: &RadialGrid, interval: (f64, f64)) -> Result<()> {
    let (lo, hi) = interval;
    let (gmin, gmax) = (grid.r_min(), grid.r_max());
    if !(lo < hi) {
        return Err(Error::param("interval", format!("empty interval ({lo}, {hi})")));
    }
    for r in [lo, hi] {
        if !(r >= gmin && r <= gmax) {
            return Err(Error::RadiusOutside {
                radius: r,
                lo: gmin,
                hi: gmax,
            });
        }
    }
    Ok(())
}

/// Cutoff equal to 1 on the middle of `[lo, hi]` with cosine shoulders
/// covering 10% of the interval at each end.
pub fn window(x: f64, interval: (f64, f64)) -> f64 {
    let (lo, hi) = interval;
    if x <= lo || x >= hi {
        return 0.0;
    }
    let shoulder = 0.1 * (hi - lo);
    let edge = (x - lo).min(hi - x);
    if edge >= shoulder {
        1.0
    } else {
        0.5 * (1.0 - (std::f64::consts::PI * edge / shoulder).cos())
    }
}

/// Distance between `field_eta` and a profile on `interval`, measured with
/// the plain interval measure (`dx`, or `dr` for radial grids).
///
/// `L2` and `Hs` use the smooth window; `Sup` is the unwindowed maximum
/// over the interval nodes.
pub fn profile_distance(
    field_eta: &[f64],
    profile: &SolitonProfile,
    interval: (f64, f64),
    norm: DistanceNorm,
) -> Result<f64> {
    let grid = &profile.grid;
    if field_eta.len() != grid.len() {
        return Err(Error::Grid(format!(
            "{} samples against a {}-point profile",
            field_eta.len(),
            grid.len()
        )));
    }
    check_interval(grid, interval)?;
    let diff: Vec<f64> = field_eta
        .iter()
        .zip(&profile.u)
        .enumerate()
        .map(|(k, (e, u))| window(grid.coord(k), interval) * (e - u))
        .collect();
    match norm {
        DistanceNorm::L2 => Ok((diff.iter().map(|d| d * d).sum::<f64>() * grid.spacing()).sqrt()),
        DistanceNorm::Hs(s) => {
            if !(0.0..1.0).contains(&s) {
                return Err(Error::param("s", format!("need 0 <= s < 1, got {s}")));
            }
            let z: Vec<Complex64> = diff.iter().map(|&d| Complex64::new(d, 0.0)).collect();
            let sq = Spectral::new(grid).hs_norm_sq(&z, s);
            // the radial extension covers [0, R] four times
            let sq = match grid.dimension() {
                Dimension::One => sq,
                Dimension::Three => 0.25 * sq,
            };
            Ok(sq.sqrt())
        }
        DistanceNorm::Sup => Ok(nodes_in(grid, interval.0, interval.1)
            .map(|k| (field_eta[k] - profile.u[k]).abs())
            .fold(0.0, f64::max)),
    }
}

/// Ground state for `E` on `grid`, whatever its dimension.
pub fn solve_profile(energy: f64, nl: &NonlinearitySpec, grid: &RadialGrid) -> Result<SolitonProfile> {
    match grid.dimension() {
        Dimension::One => solve_profile_1d(energy, nl, grid),
        Dimension::Three => solve_profile_3d(energy, nl, grid),
    }
}

pub const DEFAULT_FIT_RANGE: (f64, f64) = (1e-2, 1e2);

/// Best-fitting ground-state energy for `field_eta` on `interval` in the
/// windowed `L²` distance; returns `(E_fit, distance)`.
pub fn fit_profile(
    field_eta: &[f64],
    nl: &NonlinearitySpec,
    grid: &RadialGrid,
    interval: (f64, f64),
) -> Result<(f64, f64)> {
    fit_profile_in(field_eta, nl, grid, interval, DEFAULT_FIT_RANGE)
}

pub fn fit_profile_in(
    field_eta: &[f64],
    nl: &NonlinearitySpec,
    grid: &RadialGrid,
    interval: (f64, f64),
    range: (f64, f64),
) -> Result<(f64, f64)> {
    check_interval(grid, interval)?;
    if field_eta.len() != grid.len() {
        return Err(Error::Grid("field and grid lengths differ".into()));
    }
    if !(range.0 > 0.0 && range.1 > range.0) {
        return Err(Error::param("range", "need 0 < lo < hi"));
    }
    let objective = |log_e: f64| -> f64 {
        let e = log_e.exp();
        match solve_profile(e, nl, grid) {
            Ok(p) => profile_distance(field_eta, &p, interval, DistanceNorm::L2).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };
    let scan = 48;
    let (a, b) = (range.0.ln(), range.1.ln());
    let xs: Vec<f64> = (0..=scan).map(|i| a + (b - a) * i as f64 / scan as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| objective(x)).collect();
    let best = ys
        .iter()
        .enumerate()
        .filter(|(_, y)| y.is_finite())
        .min_by(|p, q| p.1.total_cmp(q.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::NoBracket("no admissible energy in the fit range".into()))?;
    if best == 0 || best == scan {
        return Err(Error::NoBracket(format!(
            "distance is minimal at the end of the range [{}, {}]",
            range.0, range.1
        )));
    }
    let (mut lo, mut hi) = (xs[best - 1], xs[best + 1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    // relative width 1e-9 in E is a width of 1e-9 in log E
    while hi - lo > 1e-9 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = objective(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x.exp(), objective(x)))
}
