//! Uniform periodic 1D grid and normalized complex wave functions living on it.
//!
//! Grid point `i` sits at `x_min + i * dx` with `dx = (x_max - x_min) / n_points`
//! and owns the cell `[x_i - dx/2, x_i + dx/2)`. The domain is periodic, so
//! `x_max` itself is the image of `x_min` and is not a grid point.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::UnitSystem;

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid("x_max must exceed x_min".into()));
        }
        if n_points < MIN_POINTS || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points = {n_points}: power of two >= {MIN_POINTS} required"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Grid symmetric about the origin, `[-half_width, half_width)`.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x_min + self.x_max)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / self.length();
        (0..n)
            .map(|j| {
                let j = j as isize;
                let j = if j < (n / 2) as isize { j } else { j - n as isize };
                j as f64 * dk
            })
            .collect()
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length()
    }

    /// Index of the image of point `i` under reflection about the grid centre.
    pub fn mirror_index(&self, i: usize) -> usize {
        (self.n_points - i) % self.n_points
    }

    /// Index of the cell containing `x`, if it lies inside the domain.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let s = (x - self.x_min) / self.dx() + 0.5;
        if !s.is_finite() || s < 0.0 {
            return None;
        }
        let i = s.floor() as usize;
        (i < self.n_points).then_some(i)
    }
}

/// Forward/inverse FFT pair for one grid size.
#[derive(Clone)]
pub(crate) struct SpectralPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl SpectralPlan {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            n,
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Inverse transform including the `1/n` factor.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / self.n as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
}

fn check_amplitudes(grid: &Grid1D, amplitudes: &[Complex64]) -> Result<()> {
    if amplitudes.len() != grid.n_points() {
        return Err(Error::GridMismatch);
    }
    if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn norm_sq_of(amplitudes: &[Complex64], dx: f64) -> f64 {
    amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx
}

impl WaveFunction {
    /// Builds a state from raw amplitudes and normalizes it.
    pub fn from_amplitudes(grid: Grid1D, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_amplitudes(&grid, &amplitudes)?;
        Self {
            grid,
            amplitudes,
        }
        .normalize()
    }

    /// Wraps amplitudes that are already normalized up to integration drift.
    pub(crate) fn from_evolved(grid: Grid1D, amplitudes: Vec<Complex64>) -> Self {
        Self {
            grid,
            amplitudes,
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amplitudes = grid.points().into_iter().map(f).collect();
        Self::from_amplitudes(grid, amplitudes)
    }

    /// Gaussian packet whose density has standard deviation `sigma`, centred at
    /// `x0`, carrying the plane-wave factor `exp(i p0 x / hbar)`.
    pub fn gaussian(grid: Grid1D, x0: f64, sigma: f64, p0: f64, units: &UnitSystem) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Domain("sigma must be finite and > 0".into()));
        }
        let k0 = p0 / units.hbar;
        Self::from_fn(grid, |x| {
            let envelope = (-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp();
            Complex64::from_polar(envelope, k0 * x)
        })
    }

    /// Piecewise-constant density: uniform on `[a, b)` (cell centres inside).
    pub fn uniform(grid: Grid1D, a: f64, b: f64) -> Result<Self> {
        Self::from_fn(grid, |x| {
            if x >= a && x < b {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// `sum |psi_i|^2 dx`.
    pub fn norm_sq(&self) -> f64 {
        norm_sq_of(&self.amplitudes, self.grid.dx())
    }

    pub fn normalize(mut self) -> Result<Self> {
        let norm_sq = self.norm_sq();
        if !norm_sq.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm_sq <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let scale = norm_sq.sqrt().recip();
        self.amplitudes.iter_mut().for_each(|z| *z *= scale);
        Ok(self)
    }

    /// Normalized `a * self + b * other`.
    pub fn superpose(&self, a: Complex64, other: &WaveFunction, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(p, q)| a * p + b * q)
            .collect();
        Self::from_amplitudes(self.grid, amplitudes)
    }

    /// Reflection `x -> 2c - x` about the grid centre `c`.
    pub fn mirrored(&self) -> Self {
        let amplitudes = (0..self.grid.n_points())
            .map(|i| self.amplitudes[self.grid.mirror_index(i)])
            .collect();
        Self {
            grid: self.grid,
            amplitudes,
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn probability_density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Probability mass inside `[a, b)` (by cell centre).
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let x = self.grid.x(*i);
                x >= a && x < b
            })
            .map(|(_, z)| z.norm_sqr() * dx)
            .sum()
    }

    /// Probability mass on the `width` outermost points at each end of the grid.
    pub fn edge_mass(&self, width: usize) -> f64 {
        let n = self.amplitudes.len();
        let width = width.min(n / 2);
        let dx = self.grid.dx();
        self.amplitudes[..width]
            .iter()
            .chain(&self.amplitudes[n - width..])
            .map(|z| z.norm_sqr() * dx)
            .sum()
    }

    pub fn expectation_position(&self) -> f64 {
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| self.grid.x(i) * z.norm_sqr() * dx)
            .sum::<f64>()
            / self.norm_sq()
    }

    pub fn variance_position(&self) -> f64 {
        let mean = self.expectation_position();
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| (self.grid.x(i) - mean).powi(2) * z.norm_sqr() * dx)
            .sum::<f64>()
            / self.norm_sq()
    }

    /// Momentum-space amplitudes `psi~(k_j) = dx / sqrt(2 pi) * sum_n psi_n e^{-i k_j x_n}`
    /// in FFT order, normalized so that `sum |psi~_j|^2 dk = sum |psi_n|^2 dx`.
    pub fn momentum_amplitudes(&self) -> Vec<Complex64> {
        let plan = SpectralPlan::new(self.grid.n_points());
        self.momentum_amplitudes_with(&plan)
    }

    pub(crate) fn momentum_amplitudes_with(&self, plan: &SpectralPlan) -> Vec<Complex64> {
        let mut data = self.amplitudes.clone();
        plan.forward(&mut data);
        // FFT sums are anchored at x_min; restore the absolute phase e^{-i k x_min}.
        let scale = self.grid.dx() / (2.0 * PI).sqrt();
        let x_min = self.grid.x_min();
        data.iter_mut()
            .zip(self.grid.wavenumbers())
            .for_each(|(z, k)| *z *= Complex64::from_polar(scale, -k * x_min));
        data
    }

    /// `sum |psi~_j|^2 dk`; equals [`norm_sq`](Self::norm_sq) by Parseval.
    pub fn spectral_norm_sq(&self) -> f64 {
        let dk = self.grid.dk();
        self.momentum_amplitudes()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            * dk
    }

    pub fn expectation_momentum(&self, units: &UnitSystem) -> f64 {
        let plan = SpectralPlan::new(self.grid.n_points());
        self.expectation_momentum_with(&plan, units)
    }

    pub(crate) fn expectation_momentum_with(&self, plan: &SpectralPlan, units: &UnitSystem) -> f64 {
        let mut data = self.amplitudes.clone();
        plan.forward(&mut data);
        let nyquist = self.grid.n_points() / 2;
        // the Nyquist bin has no partner of opposite sign and carries no net momentum
        let (weighted, total) = data
            .iter()
            .zip(self.grid.wavenumbers())
            .enumerate()
            .fold((0.0, 0.0), |(w, t), (j, (z, k))| {
                let p = z.norm_sqr();
                let k = if j == nyquist { 0.0 } else { k };
                (w + k * p, t + p)
            });
        units.hbar * weighted / total
    }
}
