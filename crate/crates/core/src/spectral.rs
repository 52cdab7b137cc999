//! Fourier machinery on a [`RadialGrid`].
//!
//! On the line the grid is periodic and the FFT acts directly. In 3D a radial
//! profile is even about the origin and vanishes at the Dirichlet wall, so it
//! is extended evenly across `r = 0` and oddly across `r = R_max`; the result
//! has period `4 R_max` (`4(N-1)` samples) and is smooth wherever the field is.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::grid::{Dimension, RadialGrid};

pub struct Spectral {
    grid: RadialGrid,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: &RadialGrid) -> Self {
        let size = match grid.dimension() {
            Dimension::One => grid.len(),
            Dimension::Three => 4 * (grid.len() - 1),
        };
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let period = size as f64 * grid.spacing();
        let wavenumbers = (0..size)
            .map(|m| {
                let m = if m <= size / 2 {
                    m as f64
                } else {
                    m as f64 - size as f64
                };
                2.0 * PI * m / period
            })
            .collect();
        Self {
            grid: *grid,
            size,
            forward,
            inverse,
            wavenumbers,
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn nyquist(&self) -> Option<usize> {
        (self.size % 2 == 0).then_some(self.size / 2)
    }

    fn extend(&self, values: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.grid.len());
        match self.grid.dimension() {
            Dimension::One => values.to_vec(),
            Dimension::Three => {
                let m = self.grid.len() - 1;
                let mut out = Vec::with_capacity(self.size);
                out.extend_from_slice(&values[..m]);
                out.extend(values[1..=m].iter().rev().map(|v| -v));
                out.extend(values[..m].iter().map(|v| -v));
                out.extend(values[1..=m].iter().rev());
                out
            }
        }
    }

    /// Unnormalized forward transform of the (extended) samples.
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = self.extend(values);
        self.forward.process(&mut buf);
        buf
    }

    /// Forward transform of data already laid out on the FFT domain.
    pub fn forward_raw(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Normalized inverse transform, in place, on the FFT domain.
    pub fn inverse_raw(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.size as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    fn back_to_grid(&self, mut spec: Vec<Complex64>) -> Vec<Complex64> {
        self.inverse_raw(&mut spec);
        spec.truncate(self.grid.len());
        spec
    }

    pub fn derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut spec = self.forward(values);
        for (c, &k) in spec.iter_mut().zip(&self.wavenumbers) {
            *c *= Complex64::new(0.0, k);
        }
        if let Some(m) = self.nyquist() {
            spec[m] = Complex64::new(0.0, 0.0);
        }
        self.back_to_grid(spec)
    }

    pub fn derivative_real(&self, values: &[f64]) -> Vec<f64> {
        let z: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.derivative(&z).into_iter().map(|c| c.re).collect()
    }

    pub fn second_derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut spec = self.forward(values);
        for (c, &k) in spec.iter_mut().zip(&self.wavenumbers) {
            *c *= -k * k;
        }
        self.back_to_grid(spec)
    }

    /// `Δψ`: `ψ''` on the line, `ψ'' + 2ψ'/r` for radial fields (`3ψ''` at the origin).
    pub fn laplacian(&self, values: &[Complex64]) -> Vec<Complex64> {
        let second = self.second_derivative(values);
        match self.grid.dimension() {
            Dimension::One => second,
            Dimension::Three => {
                let first = self.derivative(values);
                second
                    .iter()
                    .zip(&first)
                    .enumerate()
                    .map(|(k, (&d2, &d1))| {
                        if k == 0 {
                            3.0 * d2
                        } else {
                            d2 + 2.0 * d1 / self.grid.coord(k)
                        }
                    })
                    .collect()
            }
        }
    }

    /// `Σ (1+k²)^s |f̂_k|²` scaled so that `s = 0` reproduces `∫|f|² dx` over
    /// the (extended) periodic domain.
    pub fn hs_norm_sq(&self, values: &[Complex64], s: f64) -> f64 {
        let spec = self.forward(values);
        let period = self.size as f64 * self.grid.spacing();
        let n2 = (self.size as f64).powi(2);
        spec.iter()
            .zip(&self.wavenumbers)
            .map(|(c, &k)| (1.0 + k * k).powf(s) * c.norm_sqr())
            .sum::<f64>()
            * period
            / n2
    }

    /// Trigonometric interpolant of real samples evaluated `factor` times
    /// more densely: at `r_min + j·Δ/factor` for `j = 0..factor·N` on the
    /// line and `j = 0..=factor·(N-1)` in 3D.
    pub fn refine(&self, values: &[f64], factor: usize) -> Vec<f64> {
        let z: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let spec = self.forward(&z);
        let n = self.size;
        let big = n * factor;
        let mut padded = vec![Complex64::new(0.0, 0.0); big];
        let half = n / 2;
        for m in 0..n {
            if Some(m) == self.nyquist() {
                // split the Nyquist mode evenly so the interpolant stays real
                padded[m] += 0.5 * spec[m];
                padded[big - m] += 0.5 * spec[m];
            } else if m < half || (n % 2 == 1 && m == half) {
                padded[m] = spec[m];
            } else {
                padded[big - (n - m)] = spec[m];
            }
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_inverse(big).process(&mut padded);
        let count = match self.grid.dimension() {
            Dimension::One => factor * self.grid.len(),
            Dimension::Three => factor * (self.grid.len() - 1) + 1,
        };
        padded.truncate(count);
        padded.into_iter().map(|c| c.re / n as f64).collect()
    }

    /// Trigonometric interpolant of real line samples.
    pub fn line_spectrum(&self, values: &[f64]) -> LineSpectrum {
        debug_assert_eq!(self.grid.dimension(), Dimension::One);
        let z: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut spec = self.forward(&z);
        let scale = 1.0 / self.size as f64;
        for c in spec.iter_mut() {
            *c *= scale;
        }
        LineSpectrum {
            coefficients: spec,
            wavenumbers: self.wavenumbers.clone(),
            origin: self.grid.r_min(),
            nyquist: self.nyquist(),
        }
    }
}

/// Fourier coefficients of a real periodic sample set; evaluates the
/// interpolant and its exact integrals off the nodes.
pub struct LineSpectrum {
    coefficients: Vec<Complex64>,
    wavenumbers: Vec<f64>,
    origin: f64,
    nyquist: Option<usize>,
}

impl LineSpectrum {
    pub fn eval(&self, x: f64) -> f64 {
        let y = x - self.origin;
        let mut acc = 0.0;
        for (m, (c, &k)) in self.coefficients.iter().zip(&self.wavenumbers).enumerate() {
            if Some(m) == self.nyquist {
                acc += c.re * (k * y).cos();
            } else {
                let (s, co) = (k * y).sin_cos();
                acc += c.re * co - c.im * s;
            }
        }
        acc
    }

    /// `∫_a^b f(x) dx` of the interpolant.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let (ya, yb) = (a - self.origin, b - self.origin);
        let mut acc = 0.0;
        for (m, (c, &k)) in self.coefficients.iter().zip(&self.wavenumbers).enumerate() {
            if m == 0 {
                acc += c.re * (b - a);
            } else if Some(m) == self.nyquist {
                acc += c.re * ((k * yb).sin() - (k * ya).sin()) / k;
            } else {
                // ∫ e^{iky} = (e^{ik yb} - e^{ik ya}) / (ik)
                let eb = Complex64::from_polar(1.0, k * yb);
                let ea = Complex64::from_polar(1.0, k * ya);
                let term = c * (eb - ea) / Complex64::new(0.0, k);
                acc += term.re;
            }
        }
        acc
    }
}
