//! Experiment configuration, read from TOML.
//!
//! A config names a scenario and carries everything a run needs: the grid,
//! the nonlinearity, the solver, the initial recipe, the diagnostic knobs and
//! the thresholds the report judges against. A check is only performed when
//! its threshold is present.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use solitonscope_core::solver::Sponge;
use solitonscope_core::{Dimension, Method, NonlinearitySpec, RadialGrid, SolverConfig};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    SolitonRegression,
    IncomingLens,
    FluxClassifier,
    PhaseSlopeStudy,
    IdentitySuite,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::SolitonRegression,
        Scenario::IncomingLens,
        Scenario::FluxClassifier,
        Scenario::PhaseSlopeStudy,
        Scenario::IdentitySuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SolitonRegression => "soliton_regression",
            Scenario::IncomingLens => "incoming_lens",
            Scenario::FluxClassifier => "flux_classifier",
            Scenario::PhaseSlopeStudy => "phase_slope_study",
            Scenario::IdentitySuite => "identity_suite",
        }
    }
}

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Evolve,
    Hydro,
    Boxes,
    Lift,
    Slope,
    Fit,
    Distances,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Evolve,
        Stage::Hydro,
        Stage::Boxes,
        Stage::Lift,
        Stage::Slope,
        Stage::Fit,
        Stage::Distances,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Evolve => "evolve",
            Stage::Hydro => "hydro",
            Stage::Boxes => "boxes",
            Stage::Lift => "lift",
            Stage::Slope => "slope",
            Stage::Fit => "fit",
            Stage::Distances => "distances",
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Stage::ALL.iter().map(|st| st.name()).collect();
            format!("unknown stage `{s}` (expected one of {})", names.join(", "))
        })
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    /// 1 (periodic line) or 3 (radial ball).
    pub dimension: u8,
    pub num_points: usize,
    /// Half-length `L` of the line, or `R_max` of the ball.
    pub extent: f64,
}

impl GridParams {
    pub fn build(&self) -> CliResult<RadialGrid> {
        let grid = match self.dimension {
            1 => RadialGrid::line(self.extent, self.num_points)?,
            3 => RadialGrid::radial(self.extent, self.num_points)?,
            d => return Err(CliError::Config(format!("grid.dimension must be 1 or 3, got {d}"))),
        };
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityParams {
    /// `p` in `F(s) = c·s^p`.
    pub power: f64,
    /// `c`; negative is focusing, zero is the free equation.
    pub coefficient: f64,
}

impl NonlinearityParams {
    pub fn build(&self) -> CliResult<NonlinearitySpec> {
        if self.coefficient == 0.0 {
            return Ok(NonlinearitySpec::free());
        }
        Ok(NonlinearitySpec::focusing_power(self.power, self.coefficient)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpongeParams {
    pub width: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub dt: f64,
    pub t_final: f64,
    pub output_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard_max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sponge: Option<SpongeParams>,
}

impl SolverParams {
    pub fn build(&self, dim: Dimension) -> SolverConfig {
        let mut cfg = SolverConfig::new(Method::for_dimension(dim), self.dt, self.t_final, self.output_stride);
        if let Some(tol) = self.picard_tol {
            cfg.picard_tol = tol;
        }
        if let Some(n) = self.picard_max_iter {
            cfg.picard_max_iter = n;
        }
        cfg.sponge = self.sponge.as_ref().map(|s| Sponge {
            width: s.width,
            strength: s.strength,
        });
        cfg
    }
}

/// Initial data: a recipe name plus its numeric parameters.
///
/// Besides the core recipes (`exact_soliton`, `lens_soliton`,
/// `gaussian_lens`) the runner knows `random_smooth`, a sum of seeded
/// random Gaussian lenses with keys `bumps`, `amplitude`, `width`, `spread`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeParams {
    pub kind: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticParams {
    /// Sphere radii for the flux series (positive half-widths on the line).
    pub radii: Vec<f64>,
    /// Radii at or beyond this one count as exterior for the classifier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exterior_radius: Option<f64>,
    /// Fit and distance interval `I`; the fit and distance stages are
    /// skipped without it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    /// Good-box amplitude level; half the final peak when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_box_width")]
    pub box_min_width: f64,
    /// Fraction of the box duration used for the phase slope.
    #[serde(default = "default_slope_window")]
    pub slope_window: f64,
    /// Excursion budget for the classifier; `1e-3·mass(0)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_tol: Option<f64>,
    #[serde(default = "default_fit_range")]
    pub fit_energy_range: [f64; 2],
    /// Every how many snapshots `trajectory.csv` samples.
    #[serde(default = "default_trajectory_every")]
    pub trajectory_every: usize,
    /// Every how many snapshots the distance stage refits the profile.
    #[serde(default = "one")]
    pub distance_every: usize,
}

fn default_box_width() -> f64 {
    0.5
}
fn default_slope_window() -> f64 {
    0.5
}
fn default_fit_range() -> [f64; 2] {
    [1e-2, 1e2]
}
fn default_trajectory_every() -> usize {
    50
}
fn one() -> usize {
    1
}

/// Pass/fail thresholds. Absent entries are not checked.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Max relative mass drift.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_drift: Option<f64>,
    /// Max relative energy drift.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_drift: Option<f64>,
    /// `max |2·cumulative + Δ ball mass|` relative to `mass(0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_balance: Option<f64>,
    /// Require `0 ≤ -cumulative ≤ mass(0)/2 + 1e-9` while the flow is incoming.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iwc_bound: Option<bool>,
    /// Kinetic splitting relative error on every nodeless snapshot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinetic_splitting: Option<f64>,
    /// Expected classifier verdict at the exterior radii.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<String>,
    /// Relative error of the free-evolution variance quadratic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_virial: Option<f64>,
    /// `‖|ψ(T)| - u_E‖_{L²}` for exact-soliton runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form_l2: Option<f64>,
    /// Lift reconstruction error relative to `max |ψ|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<f64>,
    /// Require every plaquette winding to vanish.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vortex_free: Option<bool>,
    /// `|E_hat - E|/E` against the recipe energy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_hat_recipe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_spread: Option<f64>,
    /// `|E_hat - E_fit|/E_fit`, both over the final quarter (`E_fit` as the
    /// mean over the distance samples there).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_gap: Option<f64>,
    /// Required ratio of the largest distance to the largest distance over
    /// the final quarter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_decrease: Option<f64>,
    /// Weak-form ratio for every bump against the fitted profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridParams,
    pub nonlinearity: NonlinearityParams,
    pub solver: SolverParams,
    pub recipe: RecipeParams,
    pub diagnostics: DiagnosticParams,
    #[serde(default)]
    pub thresholds: Thresholds,
}

pub const CLASSIFIER_VERDICTS: [&str; 3] = ["always_incoming", "incoming_then_outgoing", "mixed"];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Everything that can be checked without computing: the grid, solver,
    /// recipe and diagnostic parameters, and that every radius and interval
    /// sits inside the grid.
    pub fn validate(&self) -> CliResult<()> {
        let grid = self.grid.build()?;
        let nl = self.nonlinearity.build()?;
        self.solver.build(grid.dimension()).validate(&grid)?;
        crate::scenario::build_recipe(self, &grid)?;

        let d = &self.diagnostics;
        if d.radii.is_empty() {
            return Err(CliError::Config("diagnostics.radii must not be empty".into()));
        }
        let limit = self.radius_limit(&grid);
        for &r in &d.radii {
            if !(r > 0.0 && r < limit) {
                return Err(CliError::Config(format!("radius {r} outside (0, {limit})")));
            }
        }
        if d.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("diagnostics.radii must be strictly increasing".into()));
        }
        if let Some(r) = d.exterior_radius {
            if !d.radii.iter().any(|&x| x >= r) {
                return Err(CliError::Config(format!(
                    "no flux radius at or beyond exterior_radius {r}"
                )));
            }
        }
        if let Some([lo, hi]) = d.interval {
            if !(lo < hi && lo >= grid.r_min() && hi <= grid.r_max()) {
                return Err(CliError::Config(format!(
                    "interval [{lo}, {hi}] not inside [{}, {}]",
                    grid.r_min(),
                    grid.r_max()
                )));
            }
            if nl.coefficient >= 0.0 {
                return Err(CliError::Config("a fit interval needs a focusing nonlinearity".into()));
            }
        }
        if let Some(delta) = d.delta {
            if !(delta > 0.0) {
                return Err(CliError::Config("diagnostics.delta must be > 0".into()));
            }
        }
        if !(d.slope_window > 0.0 && d.slope_window <= 1.0) {
            return Err(CliError::Config("diagnostics.slope_window must lie in (0, 1]".into()));
        }
        let [elo, ehi] = d.fit_energy_range;
        if !(elo > 0.0 && ehi > elo) {
            return Err(CliError::Config(
                "diagnostics.fit_energy_range needs 0 < lo < hi".into(),
            ));
        }
        if d.trajectory_every == 0 || d.distance_every == 0 {
            return Err(CliError::Config("sampling strides must be >= 1".into()));
        }
        if let Some(tol) = d.l1_tol {
            if !(tol >= 0.0) {
                return Err(CliError::Config("diagnostics.l1_tol must be >= 0".into()));
            }
        }
        if let Some(v) = &self.thresholds.classifier {
            if !CLASSIFIER_VERDICTS.contains(&v.as_str()) {
                return Err(CliError::Config(format!("unknown classifier verdict `{v}`")));
            }
        }
        Ok(())
    }

    /// Largest admissible flux radius: inside the sponge when there is one.
    fn radius_limit(&self, grid: &RadialGrid) -> f64 {
        let edge = grid.interior_radius_limit();
        match &self.solver.sponge {
            Some(s) => edge.min(grid.r_max() - s.width),
            None => edge,
        }
    }

    /// Output directory after the `--output-dir` flag and the `OUTPUT_DIR`
    /// environment variable have had their say, in that order.
    pub fn resolve_output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(dir) = flag {
            return dir.to_path_buf();
        }
        if let Some(dir) = std::env::var_os("OUTPUT_DIR") {
            return PathBuf::from(dir).join(self.scenario.name());
        }
        self.output_dir.clone()
    }

    /// Half-length `20π` line default used by several scenarios.
    pub fn line_extent() -> f64 {
        20.0 * PI
    }
}

/// Make sure `dir` exists and accepts files.
pub fn check_writable(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("output_dir {}: {e}", dir.display())))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"")
        .map_err(|e| CliError::Config(format!("output_dir {} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(&probe);
    Ok(())
}
