//! Uniform spatial grids for the line and for the radial half-line in 3D.
//!
//! The line grid is periodic on `[-L, L)`; nodes are `x_k = -L + k·Δ` with
//! `Δ = 2L/N`, so `x = 0` is a node whenever `N` is even. The radial grid
//! has nodes `r_k = k·Δ`, `k = 0..N`, with `r_0 = 0` and `r_{N-1} = R_max`
//! (the Dirichlet wall).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    /// The real line, `n = 1`.
    One,
    /// Radially symmetric fields in `R^3`.
    Three,
}

impl Dimension {
    pub fn value(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Three => 3,
        }
    }

    /// Surface constant `c_n` of the unit "sphere": the two points `{-1, 1}`
    /// on the line, `4π` in three dimensions.
    pub fn sphere_constant(self) -> f64 {
        match self {
            Dimension::One => 2.0,
            Dimension::Three => 4.0 * PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    dimension: Dimension,
    r_min: f64,
    r_max: f64,
    num_points: usize,
    spacing: f64,
}

impl RadialGrid {
    /// Periodic line grid on `[-half_length, half_length)`.
    pub fn line(half_length: f64, num_points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Grid(format!("half length must be positive, got {half_length}")));
        }
        if num_points < MIN_POINTS || num_points % 2 != 0 {
            return Err(Error::Grid(format!(
                "line grid needs an even number of points >= {MIN_POINTS}, got {num_points}"
            )));
        }
        Ok(Self {
            dimension: Dimension::One,
            r_min: -half_length,
            r_max: half_length,
            num_points,
            spacing: 2.0 * half_length / num_points as f64,
        })
    }

    /// Radial grid on `[0, r_max]` including both endpoints.
    pub fn radial(r_max: f64, num_points: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Grid(format!("r_max must be positive, got {r_max}")));
        }
        if num_points < MIN_POINTS {
            return Err(Error::Grid(format!(
                "radial grid needs at least {MIN_POINTS} points, got {num_points}"
            )));
        }
        Ok(Self {
            dimension: Dimension::Three,
            r_min: 0.0,
            r_max,
            num_points,
            spacing: r_max / (num_points - 1) as f64,
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        self.num_points == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Coordinate of node `k` (`x_k` on the line, `r_k` in 3D).
    pub fn coord(&self, k: usize) -> f64 {
        self.r_min + k as f64 * self.spacing
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.num_points).map(|k| self.coord(k)).collect()
    }

    /// Distance from the origin, `|x|`.
    pub fn radius(&self, k: usize) -> f64 {
        self.coord(k).abs()
    }

    /// Quadrature weight of node `k` for `∫ f d^n x`.
    ///
    /// Line: `Δ` (periodic trapezoid). 3D: `4π r_k² Δ`, halved at the wall.
    pub fn weight(&self, k: usize) -> f64 {
        match self.dimension {
            Dimension::One => self.spacing,
            Dimension::Three => {
                let r = self.coord(k);
                let w = 4.0 * PI * r * r * self.spacing;
                if k + 1 == self.num_points {
                    0.5 * w
                } else {
                    w
                }
            }
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.num_points).map(|k| self.weight(k)).collect()
    }

    /// `∫ f d^n x` by the grid quadrature.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.num_points);
        values.iter().enumerate().map(|(k, v)| v * self.weight(k)).sum()
    }

    /// Index of the node nearest to coordinate `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x - self.r_min) / self.spacing).round();
        k.clamp(0.0, (self.num_points - 1) as f64) as usize
    }

    /// Largest coordinate strictly usable as an interior radius.
    pub fn interior_radius_limit(&self) -> f64 {
        match self.dimension {
            Dimension::One => self.r_max - self.spacing,
            Dimension::Three => self.r_max,
        }
    }

    /// Mirror index of node `k` under `x -> -x` on the periodic line.
    pub fn mirror(&self, k: usize) -> usize {
        (self.num_points - k) % self.num_points
    }
}

/// Indices of the nodes whose coordinates lie in `[lo, hi]`.
pub fn nodes_in(grid: &RadialGrid, lo: f64, hi: f64) -> std::ops::Range<usize> {
    let n = grid.len() as f64;
    let first = ((lo - grid.r_min()) / grid.spacing() - 1e-9).ceil().clamp(0.0, n);
    let end = ((hi - grid.r_min()) / grid.spacing() + 1e-9).floor() + 1.0;
    let end = end.clamp(0.0, n);
    let first = first as usize;
    let end = end as usize;
    first.min(end)..end
}
