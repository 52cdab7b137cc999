//! Fields, nonlinearity, conserved functionals and norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grid::{Dimension, RadialGrid};
use crate::spectral::Spectral;

/// `F(s) = coefficient · s^power` for `s = |ψ| ≥ 0`.
///
/// Cubic focusing is `power = 2, coefficient = -1`; `coefficient = 0` is the
/// free equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub power: f64,
    pub coefficient: f64,
}

impl NonlinearitySpec {
    pub fn focusing_power(power: f64, coefficient: f64) -> Result<Self> {
        if !(power.is_finite() && power >= 1.0) {
            return Err(Error::param("power", format!("must be >= 1, got {power}")));
        }
        if !coefficient.is_finite() {
            return Err(Error::param("coefficient", "must be finite"));
        }
        Ok(Self { power, coefficient })
    }

    pub fn cubic_focusing() -> Self {
        Self {
            power: 2.0,
            coefficient: -1.0,
        }
    }

    pub fn free() -> Self {
        Self {
            power: 2.0,
            coefficient: 0.0,
        }
    }

    pub fn is_free(&self) -> bool {
        self.coefficient == 0.0
    }

    pub fn is_cubic(&self) -> bool {
        self.power == 2.0
    }

    /// `F(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        if self.coefficient == 0.0 {
            0.0
        } else {
            self.coefficient * s.powf(self.power)
        }
    }

    /// Potential energy density `F̃(s)s² = coefficient · s^{p+2}/(p+2)`,
    /// the one for which `½∫|∇ψ|² + ∫F̃(|ψ|)|ψ|²` is conserved.
    pub fn potential_density(&self, s: f64) -> f64 {
        if self.coefficient == 0.0 {
            0.0
        } else {
            self.coefficient * s.powf(self.power + 2.0) / (self.power + 2.0)
        }
    }

    /// `G(ρ) = 2 F̃(√ρ) ρ`, the antiderivative of `F(√ρ)` in `ρ`.
    fn density_antiderivative(&self, rho: f64) -> f64 {
        2.0 * self.coefficient * rho.powf(0.5 * self.power + 1.0) / (self.power + 2.0)
    }

    /// Energy-conserving average of `F` between densities `a` and `b`:
    /// `(G(b) - G(a)) / (b - a)`, `F(√a)` when they coincide.
    pub fn averaged(&self, a: f64, b: f64) -> f64 {
        if self.coefficient == 0.0 {
            return 0.0;
        }
        if self.is_cubic() {
            return 0.5 * self.coefficient * (a + b);
        }
        let scale = a.abs().max(b.abs());
        if (b - a).abs() <= 1e-7 * scale || scale == 0.0 {
            self.eval((0.5 * (a + b)).sqrt())
        } else {
            (self.density_antiderivative(b) - self.density_antiderivative(a)) / (b - a)
        }
    }
}

/// Samples of `ψ` on a grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WaveField {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} samples for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            time: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn amplitude(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.density())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|c| c.conj()).collect(),
            time: self.time,
        }
    }

    /// Multiply by the global phase `e^{iα}`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let p = Complex64::from_polar(1.0, alpha);
        Self {
            grid: self.grid,
            values: self.values.iter().map(|c| c * p).collect(),
            time: self.time,
        }
    }

    /// `w_k = r_k ψ_k` for radial fields.
    pub(crate) fn reduced(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| v * self.grid.coord(k))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedSet {
    pub mass: f64,
    pub energy: f64,
    pub variance: f64,
    pub dilation: f64,
    pub h1_norm: f64,
}

/// Kinetic integral `∫|∇ψ|²` with the solver's own discretization:
/// spectral on the line, forward differences of `w = rψ` in 3D.
pub fn kinetic_integral(field: &WaveField) -> f64 {
    let grid = &field.grid;
    match grid.dimension() {
        Dimension::One => {
            let d = Spectral::new(grid).derivative(&field.values);
            d.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.spacing()
        }
        Dimension::Three => {
            let w = field.reduced();
            let h = grid.spacing();
            let sum: f64 = w.windows(2).map(|p| (p[1] - p[0]).norm_sqr()).sum();
            4.0 * std::f64::consts::PI * sum / h
        }
    }
}

/// Dilation observable `(ψ, Aψ) = ∫ x·J d^n x`.
pub fn dilation(field: &WaveField) -> f64 {
    let grid = &field.grid;
    match grid.dimension() {
        Dimension::One => {
            let d = Spectral::new(grid).derivative(&field.values);
            field
                .values
                .iter()
                .zip(&d)
                .enumerate()
                .map(|(k, (p, dp))| grid.coord(k) * (p.conj() * dp).im)
                .sum::<f64>()
                * grid.spacing()
        }
        Dimension::Three => {
            // Im(w̄ w') = r² J_r, evaluated on the faces between nodes
            let w = field.reduced();
            let h = grid.spacing();
            let sum: f64 = w
                .windows(2)
                .enumerate()
                .map(|(k, p)| (k as f64 + 0.5) * h * (p[0].conj() * p[1]).im)
                .sum();
            4.0 * std::f64::consts::PI * sum
        }
    }
}

pub fn conserved_set(field: &WaveField, nl: &NonlinearitySpec) -> Result<ConservedSet> {
    if !field.is_finite() {
        return Err(Error::NonFinite("field"));
    }
    let grid = &field.grid;
    let rho = field.density();
    let mass = grid.integrate(&rho);
    let kinetic = kinetic_integral(field);
    let potential: Vec<f64> = field.values.iter().map(|c| nl.potential_density(c.norm())).collect();
    let energy = 0.5 * kinetic + grid.integrate(&potential);
    let x2rho: Vec<f64> = rho.iter().enumerate().map(|(k, r)| grid.coord(k).powi(2) * r).collect();
    let variance = grid.integrate(&x2rho);
    let set = ConservedSet {
        mass,
        energy,
        variance,
        dilation: dilation(field),
        h1_norm: (mass + kinetic).sqrt(),
    };
    let all = [set.mass, set.energy, set.variance, set.dilation, set.h1_norm];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("conserved quantities"));
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Norm {
    L2,
    H1,
    Lp(f64),
    Hs(f64),
    WeightedX2,
}

pub fn weighted_norm(field: &WaveField, norm: Norm) -> Result<f64> {
    let grid = &field.grid;
    match norm {
        Norm::L2 => Ok(field.mass().sqrt()),
        Norm::H1 => Ok((field.mass() + kinetic_integral(field)).sqrt()),
        Norm::Lp(p) => {
            if !(p >= 1.0) {
                return Err(Error::param("p", format!("Lp needs p >= 1, got {p}")));
            }
            let v: Vec<f64> = field.values.iter().map(|c| c.norm().powf(p)).collect();
            Ok(grid.integrate(&v).powf(1.0 / p))
        }
        Norm::Hs(s) => {
            if !(s >= 0.0) {
                return Err(Error::param("s", format!("H^s needs s >= 0, got {s}")));
            }
            if grid.dimension() != Dimension::One {
                return Err(Error::Unsupported(
                    "fractional H^s of a whole radial field; use a windowed profile distance".into(),
                ));
            }
            Ok(Spectral::new(grid).hs_norm_sq(&field.values, s).sqrt())
        }
        Norm::WeightedX2 => {
            let v: Vec<f64> = field
                .values
                .iter()
                .enumerate()
                .map(|(k, c)| grid.coord(k).powi(2) * c.norm_sqr())
                .collect();
            Ok(grid.integrate(&v).sqrt())
        }
    }
}

/// Initial-condition recipes.
#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    /// Cubic ground state `u_E` (closed form on the line, shooting in 3D).
    ExactSoliton {
        energy: f64,
    },
    /// `amplitude · u_E(r) · e^{-i b r²}`.
    LensSoliton {
        energy: f64,
        amplitude: f64,
        focusing: f64,
    },
    /// `amplitude · e^{-r²/(2 width²)} · e^{-i b r²}`.
    GaussianLens {
        amplitude: f64,
        width: f64,
        focusing: f64,
    },
    CustomSamples(Vec<Complex64>),
}

impl Recipe {
    /// Build a recipe from its name and a flat parameter map.
    ///
    /// Keys: `exact_soliton {E}`, `lens_soliton {E, amplitude, b}`,
    /// `gaussian_lens {amplitude, width, b}`.
    pub fn from_params(kind: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match kind {
            "exact_soliton" => &["E"],
            "lens_soliton" => &["E", "amplitude", "b"],
            "gaussian_lens" => &["amplitude", "width", "b"],
            "custom_samples" => {
                return Err(Error::param(
                    "recipe",
                    "custom_samples carries sample data and cannot be built from a parameter map",
                ))
            }
            other => return Err(Error::UnknownRecipe(other.to_string())),
        };
        if let Some(key) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::UnknownParameter {
                recipe: kind.to_string(),
                key: key.clone(),
            });
        }
        let get = |key: &str| -> Result<f64> {
            params.get(key).copied().ok_or_else(|| Error::MissingParameter {
                recipe: kind.to_string(),
                key: key.to_string(),
            })
        };
        let recipe = match kind {
            "exact_soliton" => Recipe::ExactSoliton { energy: get("E")? },
            "lens_soliton" => Recipe::LensSoliton {
                energy: get("E")?,
                amplitude: params.get("amplitude").copied().unwrap_or(1.0),
                focusing: get("b")?,
            },
            _ => Recipe::GaussianLens {
                amplitude: get("amplitude")?,
                width: get("width")?,
                focusing: get("b")?,
            },
        };
        recipe.validate()?;
        Ok(recipe)
    }

    fn validate(&self) -> Result<()> {
        let finite_positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and > 0, got {v}")))
            }
        };
        let lens = |b: f64| {
            if b.is_finite() {
                Ok(())
            } else {
                Err(Error::param("b", "must be finite"))
            }
        };
        match *self {
            Recipe::ExactSoliton { energy } => finite_positive("E", energy),
            Recipe::LensSoliton {
                energy,
                amplitude,
                focusing,
            } => {
                finite_positive("E", energy)?;
                finite_positive("amplitude", amplitude)?;
                lens(focusing)
            }
            Recipe::GaussianLens {
                amplitude,
                width,
                focusing,
            } => {
                finite_positive("amplitude", amplitude)?;
                finite_positive("width", width)?;
                lens(focusing)
            }
            Recipe::CustomSamples(ref v) => {
                if v.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::NonFinite("custom samples"))
                }
            }
        }
    }
}

fn check_resolution(grid: &RadialGrid, width: f64) -> Result<()> {
    let points_per_width = width / grid.spacing();
    if points_per_width < 8.0 {
        return Err(Error::Unresolved { points_per_width });
    }
    Ok(())
}

/// Closed-form cubic ground state on the line: `√(2E) sech(√E x)`.
pub fn sech_profile(energy: f64, x: f64) -> f64 {
    (2.0 * energy).sqrt() / (energy.sqrt() * x).cosh()
}

pub fn make_initial_condition(recipe: &Recipe, grid: &RadialGrid) -> Result<WaveField> {
    recipe.validate()?;
    let envelope_with_lens = |envelope: Vec<f64>, b: f64| -> Vec<Complex64> {
        envelope
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let r = grid.coord(k);
                a * Complex64::from_polar(1.0, -b * r * r)
            })
            .collect()
    };
    let soliton = |energy: f64| -> Result<Vec<f64>> {
        check_resolution(grid, 1.0 / energy.sqrt())?;
        match grid.dimension() {
            Dimension::One => Ok(grid.coords().iter().map(|&x| sech_profile(energy, x)).collect()),
            Dimension::Three => {
                let p = crate::profile::solve_profile_3d(energy, &NonlinearitySpec::cubic_focusing(), grid)?;
                Ok(p.u)
            }
        }
    };
    let values = match *recipe {
        Recipe::ExactSoliton { energy } => envelope_with_lens(soliton(energy)?, 0.0),
        Recipe::LensSoliton {
            energy,
            amplitude,
            focusing,
        } => {
            let u: Vec<f64> = soliton(energy)?.into_iter().map(|v| amplitude * v).collect();
            envelope_with_lens(u, focusing)
        }
        Recipe::GaussianLens {
            amplitude,
            width,
            focusing,
        } => {
            check_resolution(grid, width)?;
            let env = grid
                .coords()
                .iter()
                .map(|&r| amplitude * (-r * r / (2.0 * width * width)).exp())
                .collect();
            envelope_with_lens(env, focusing)
        }
        Recipe::CustomSamples(ref v) => {
            let mut values = v.clone();
            if grid.dimension() == Dimension::Three {
                if let Some(last) = values.last_mut() {
                    *last = Complex64::new(0.0, 0.0);
                }
            }
            values
        }
    };
    WaveField::new(*grid, values, 0.0)
}
