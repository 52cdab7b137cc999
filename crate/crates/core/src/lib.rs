//! Radial nonlinear Schrödinger simulation and diagnostics.
//!
//! Evolves `i ψ_t = -Δψ + F(|ψ|)ψ` on the line or for radial fields in three
//! dimensions, and measures the hydrodynamic picture of the solution: density,
//! current, sphere fluxes, a continuous phase on vortex-free boxes, and the
//! distance of `|ψ|` from ground-state profiles.

pub mod error;
pub mod grid;
pub mod hydro;
pub mod io;
pub mod model;
pub mod phase;
pub mod profile;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{Dimension, RadialGrid};
pub use hydro::{
    flux_limit_checks, flux_series, hydro_frame, iwc_indicator, kinetic_splitting, velocity_decay_on_interval,
    FluxLimitReport, FluxSeries, HydroFrame, VelocityDecay,
};
pub use model::{
    conserved_set, make_initial_condition, weighted_norm, ConservedSet, NonlinearitySpec, Norm, Recipe, WaveField,
};
pub use phase::{
    find_good_boxes, lift_phase, phase_slope, polar_residuals, theta_average_identity, GoodBox, PhaseSheet,
};
pub use profile::{fit_profile, profile_distance, solve_profile_1d, solve_profile_3d, SolitonProfile};
pub use solver::{evolve, step_once, Method, SolverConfig, Trajectory};
