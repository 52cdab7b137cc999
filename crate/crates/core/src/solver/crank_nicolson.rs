use num_complex::Complex64;
use std::f64::consts::PI;

use super::{zero, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::model::{NonlinearitySpec, WaveField};

/// Crank–Nicolson for `i w_t = -w'' + F(|w|/r) w`, `w = rψ`, `w(0) = w(R) = 0`.
///
/// The nonlinearity enters through the difference quotient of its density
/// antiderivative between the old and new states, so the discrete mass and
/// energy are both invariants of the (converged) Picard iteration.
pub(super) struct CrankNicolson {
    grid: RadialGrid,
    nl: NonlinearitySpec,
    dt: f64,
    w: Vec<Complex64>,
    previous: Option<Vec<Complex64>>,
    r: Vec<f64>,
    damping: Option<Vec<f64>>,
    picard_tol: f64,
    picard_max_iter: usize,
}

impl CrankNicolson {
    pub(super) fn new(initial: &WaveField, nl: NonlinearitySpec, cfg: &SolverConfig) -> Self {
        let grid = initial.grid;
        let n = grid.len();
        let mut w = initial.reduced();
        w[0] = zero();
        w[n - 1] = zero();
        let damping = cfg.sponge.map(|s| {
            s.profile(&grid)
                .into_iter()
                .map(|sigma| (-sigma * cfg.dt).exp())
                .collect()
        });
        Self {
            grid,
            nl,
            dt: cfg.dt,
            w,
            previous: None,
            r: grid.coords(),
            damping,
            picard_tol: cfg.picard_tol,
            picard_max_iter: cfg.picard_max_iter,
        }
    }

    pub(super) fn len(&self) -> usize {
        self.w.len()
    }

    pub(super) fn mass(&self) -> f64 {
        4.0 * PI * self.grid.spacing() * self.w.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub(super) fn field(&self, time: f64) -> WaveField {
        let n = self.w.len();
        let mut values = vec![zero(); n];
        for k in 1..n - 1 {
            values[k] = self.w[k] / self.r[k];
        }
        // even extrapolation a + b r² + c r⁴ through the first three nodes
        values[0] = (15.0 * values[1] - 6.0 * values[2] + values[3]) / 10.0;
        WaveField {
            grid: self.grid,
            values,
            time,
        }
    }

    fn density(&self, w: &[Complex64], k: usize) -> f64 {
        w[k].norm_sqr() / (self.r[k] * self.r[k])
    }

    pub(super) fn advance(&mut self, step: usize, flux: Option<&mut [f64]>) -> Result<()> {
        let n = self.w.len();
        let h = self.grid.spacing();
        let beta = 0.5 * self.dt / (h * h);
        let half = 0.5 * self.dt;
        let i = Complex64::new(0.0, 1.0);
        let old = self.w.clone();

        let mut guess = match &self.previous {
            Some(prev) => old.iter().zip(prev).map(|(a, b)| 2.0 * a - b).collect(),
            None => old.clone(),
        };
        let free = self.nl.is_free();
        let scale = old.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let m = n - 2;
        let mut sub = vec![zero(); m];
        let mut diag = vec![zero(); m];
        let mut sup = vec![zero(); m];
        let mut rhs = vec![zero(); m];
        let mut converged = false;
        let mut change = f64::INFINITY;
        for _ in 0..self.picard_max_iter {
            for j in 0..m {
                let k = j + 1;
                let v = if free {
                    0.0
                } else {
                    self.nl.averaged(self.density(&old, k), self.density(&guess, k))
                };
                diag[j] = Complex64::new(1.0, 2.0 * beta + half * v);
                sub[j] = Complex64::new(0.0, -beta);
                sup[j] = Complex64::new(0.0, -beta);
                rhs[j] = old[k] * Complex64::new(1.0, -2.0 * beta - half * v) + i * beta * (old[k + 1] + old[k - 1]);
            }
            let x = thomas(&sub, &diag, &sup, &rhs);
            change = x
                .iter()
                .enumerate()
                .map(|(j, v)| (v - guess[j + 1]).norm())
                .fold(0.0, f64::max)
                / scale;
            guess[1..n - 1].copy_from_slice(&x);
            guess[0] = zero();
            guess[n - 1] = zero();
            if !change.is_finite() {
                break;
            }
            if free || change <= self.picard_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Picard {
                step,
                iterations: self.picard_max_iter,
                change,
            });
        }
        if let Some(acc) = flux {
            let w_face = 4.0 * PI / h * self.dt;
            for (k, a) in acc.iter_mut().enumerate() {
                let mk = 0.5 * (old[k] + guess[k]);
                let mk1 = 0.5 * (old[k + 1] + guess[k + 1]);
                *a += w_face * (mk.conj() * mk1).im;
            }
        }
        if let Some(d) = &self.damping {
            for (c, f) in guess.iter_mut().zip(d) {
                *c *= f;
            }
        }
        self.previous = Some(old);
        self.w = guess;
        Ok(())
    }
}

/// Solve a tridiagonal system; `sub[0]` and `sup[m-1]` are ignored.
pub(crate) fn thomas(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64], rhs: &[Complex64]) -> Vec<Complex64> {
    let m = diag.len();
    let mut c = vec![zero(); m];
    let mut d = vec![zero(); m];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for j in 1..m {
        let denom = diag[j] - sub[j] * c[j - 1];
        c[j] = sup[j] / denom;
        d[j] = (rhs[j] - sub[j] * d[j - 1]) / denom;
    }
    let mut x = vec![zero(); m];
    x[m - 1] = d[m - 1];
    for j in (0..m - 1).rev() {
        x[j] = d[j] - c[j] * x[j + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_random_system() {
        let m = 7;
        let c = |a: f64, b: f64| Complex64::new(a, b);
        let sub: Vec<_> = (0..m).map(|j| c(0.3 * j as f64, -0.2)).collect();
        let sup: Vec<_> = (0..m).map(|j| c(-0.1, 0.05 * j as f64)).collect();
        let diag: Vec<_> = (0..m).map(|j| c(3.0 + j as f64, 1.0)).collect();
        let x_true: Vec<_> = (0..m).map(|j| c(j as f64 - 2.0, 0.5)).collect();
        let rhs: Vec<_> = (0..m)
            .map(|j| {
                let mut v = diag[j] * x_true[j];
                if j > 0 {
                    v += sub[j] * x_true[j - 1];
                }
                if j + 1 < m {
                    v += sup[j] * x_true[j + 1];
                }
                v
            })
            .collect();
        let x = thomas(&sub, &diag, &sup, &rhs);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
