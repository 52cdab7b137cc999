use num_complex::Complex64;

use super::SolverConfig;
use crate::grid::RadialGrid;
use crate::model::{NonlinearitySpec, WaveField};
use crate::spectral::Spectral;

/// Two-point Gauss–Legendre abscissae on `[0, 1]`.
const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

pub(super) struct SplitStep {
    grid: RadialGrid,
    spectral: Spectral,
    nl: NonlinearitySpec,
    dt: f64,
    psi: Vec<Complex64>,
    half_kick: Vec<Complex64>,
    damping: Option<Vec<f64>>,
    scratch: Vec<Complex64>,
    scratch_dx: Vec<Complex64>,
}

impl SplitStep {
    pub(super) fn new(initial: &WaveField, nl: NonlinearitySpec, cfg: &SolverConfig) -> Self {
        let grid = initial.grid;
        let spectral = Spectral::new(&grid);
        let half = 0.5 * cfg.dt;
        let half_kick = spectral
            .wavenumbers()
            .iter()
            .map(|&k| Complex64::from_polar(1.0, -k * k * half))
            .collect();
        let damping = cfg.sponge.map(|s| {
            s.profile(&grid)
                .into_iter()
                .map(|sigma| (-sigma * cfg.dt).exp())
                .collect()
        });
        let n = grid.len();
        Self {
            grid,
            spectral,
            nl,
            dt: cfg.dt,
            psi: initial.values.clone(),
            half_kick,
            damping,
            scratch: vec![Complex64::new(0.0, 0.0); n],
            scratch_dx: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub(super) fn len(&self) -> usize {
        self.psi.len()
    }

    pub(super) fn mass(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub(super) fn field(&self, time: f64) -> WaveField {
        WaveField {
            grid: self.grid,
            values: self.psi.clone(),
            time,
        }
    }

    /// Free evolution over `dt/2`. With `flux` given, adds `∫ J dt` over the
    /// substep at every node, with `J` evaluated on the exact free solution
    /// at the Gauss points.
    fn kinetic_half(&mut self, flux: Option<&mut [f64]>) {
        self.spectral.forward_raw(&mut self.psi);
        if let Some(acc) = flux {
            let half = 0.5 * self.dt;
            let nyquist = self.psi.len() / 2;
            for &g in &GAUSS {
                let s = g * half;
                for (m, (&c, &k)) in self.psi.iter().zip(self.spectral.wavenumbers()).enumerate() {
                    let c = c * Complex64::from_polar(1.0, -k * k * s);
                    self.scratch[m] = c;
                    self.scratch_dx[m] = if m == nyquist {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * Complex64::new(0.0, k)
                    };
                }
                self.spectral.inverse_raw(&mut self.scratch);
                self.spectral.inverse_raw(&mut self.scratch_dx);
                for ((a, p), d) in acc.iter_mut().zip(&self.scratch).zip(&self.scratch_dx) {
                    *a += 0.5 * half * (p.conj() * d).im;
                }
            }
        }
        for (c, k) in self.psi.iter_mut().zip(&self.half_kick) {
            *c *= k;
        }
        self.spectral.inverse_raw(&mut self.psi);
    }

    pub(super) fn advance(&mut self, mut flux: Option<&mut [f64]>) {
        self.kinetic_half(flux.as_deref_mut());
        if !self.nl.is_free() {
            for c in self.psi.iter_mut() {
                let phase = -self.nl.eval(c.norm()) * self.dt;
                *c *= Complex64::from_polar(1.0, phase);
            }
        }
        self.kinetic_half(flux);
        if let Some(d) = &self.damping {
            for (c, f) in self.psi.iter_mut().zip(d) {
                *c *= f;
            }
        }
    }
}
