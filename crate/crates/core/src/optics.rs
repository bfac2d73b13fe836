//! Beam splitting, screen states and interference fringe analysis.
//!
//! The splitter output is `alpha psi1 + i beta psi2` with real `alpha`, `beta`
//! and `alpha^2 + beta^2 = 1`. On the screen each arm is a Gaussian envelope
//! times a plane wave, the two arms being mirror images of each other:
//!
//! ```text
//! psi(x) = N [alpha G(x) e^{i P x / hbar} + i beta G(-x) e^{-i P x / hbar}]
//! I(x)   = N^2 [alpha^2 G(x)^2 + beta^2 G(-x)^2 + 2 alpha beta G(x) G(-x) sin(2 P x / hbar)]
//! ```

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, WaveFunction};
use crate::sampling::{chunked, GridSampler};
use crate::stats::solve_augmented;
use crate::units::UnitSystem;

/// Below this visibility a fringe period is reported as undefined.
pub const MIN_DETECTABLE_VISIBILITY: f64 = 0.02;
/// Minimum number of whole fringe periods the search window must hold.
pub const MIN_PERIODS_IN_WINDOW: f64 = 8.0;
/// Required envelope width in fringe periods for the flat-envelope regime.
pub const FLATNESS_PERIODS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub alpha: f64,
    pub beta: f64,
    pub transmitted: WaveFunction,
    pub reflected: WaveFunction,
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} must be in [0,1]")));
    }
    Ok((1.0 - alpha * alpha).max(0.0).sqrt())
}

impl SplitState {
    /// Splitter output with explicitly given arms.
    pub fn from_arms(alpha: f64, transmitted: WaveFunction, reflected: WaveFunction) -> Result<Self> {
        let beta = check_alpha(alpha)?;
        if transmitted.grid() != reflected.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            alpha,
            beta,
            transmitted,
            reflected,
        })
    }

    /// `alpha psi1 + i beta psi2`, renormalized to absorb any arm overlap.
    pub fn physical_state(&self) -> Result<WaveFunction> {
        self.transmitted.superpose(
            Complex64::new(self.alpha, 0.0),
            &self.reflected,
            Complex64::new(0.0, self.beta),
        )
    }

    pub fn weights(&self) -> (f64, f64) {
        (self.alpha * self.alpha, self.beta * self.beta)
    }

    /// Per-trial single-arm control: every draw first picks one arm with
    /// probability `alpha^2` / `beta^2`, then a position from that arm alone.
    pub fn sample_single_arm_trials(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::EmptyInput("n must be >= 1"));
        }
        let first = GridSampler::from_wave_function(&self.transmitted)?;
        let second = GridSampler::from_wave_function(&self.reflected)?;
        let alpha_sq = self.alpha * self.alpha;
        Ok(chunked(n, seed, |rng, count| {
            (0..count)
                .map(|_| {
                    if rng.random::<f64>() < alpha_sq {
                        first.draw(rng)
                    } else {
                        second.draw(rng)
                    }
                })
                .collect()
        }))
    }
}

/// Splits `psi` into a transmitted copy and a reflected arm equal to the
/// mirror image of `psi` about the grid centre.
pub fn beam_split(psi: &WaveFunction, alpha: f64) -> Result<SplitState> {
    SplitState::from_arms(alpha, psi.clone(), psi.mirrored())
}

/// Amplitude envelope `G(x) = exp(-(x - center)^2 / (4 sigma^2))`; its square
/// is a normal density shape with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnvelope {
    pub center: f64,
    pub sigma: f64,
}

impl GaussianEnvelope {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !(center.is_finite() && sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Domain("envelope needs finite center and sigma > 0".into()));
        }
        Ok(Self { center, sigma })
    }

    pub fn amplitude(&self, x: f64) -> f64 {
        (-(x - self.center).powi(2) / (4.0 * self.sigma * self.sigma)).exp()
    }
}

/// Fringe period `pi hbar / P`.
pub fn fringe_period(p_x: f64, units: &UnitSystem) -> f64 {
    PI * units.hbar / p_x.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessWarning {
    pub sigma: f64,
    pub required_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenState {
    pub psi: WaveFunction,
    pub flatness: Option<FlatnessWarning>,
}

pub fn screen_state(
    grid: Grid1D,
    alpha: f64,
    p_x: f64,
    envelope: GaussianEnvelope,
    units: &UnitSystem,
) -> Result<ScreenState> {
    let beta = check_alpha(alpha)?;
    if !(p_x.is_finite() && p_x != 0.0) {
        return Err(Error::Domain("P_x must be finite and non-zero".into()));
    }
    let required_sigma = FLATNESS_PERIODS * fringe_period(p_x, units);
    let flatness = (envelope.sigma < required_sigma).then_some(FlatnessWarning {
        sigma: envelope.sigma,
        required_sigma,
    });
    let k = p_x / units.hbar;
    let psi = WaveFunction::from_fn(grid, |x| {
        Complex64::from_polar(alpha * envelope.amplitude(x), k * x)
            + Complex64::i() * Complex64::from_polar(beta * envelope.amplitude(-x), -k * x)
    })?;
    Ok(ScreenState { psi, flatness })
}

/// Closed-form screen intensity, normalized to unit integral over the line.
pub fn intensity_analytic(x: f64, alpha: f64, p_x: f64, envelope: GaussianEnvelope, units: &UnitSystem) -> f64 {
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let norm_sq = 1.0 / ((2.0 * PI).sqrt() * envelope.sigma);
    let g_plus = envelope.amplitude(x);
    let g_minus = envelope.amplitude(-x);
    let value = norm_sq
        * (alpha * alpha * g_plus * g_plus
            + beta * beta * g_minus * g_minus
            + 2.0 * alpha * beta * g_plus * g_minus * (2.0 * p_x * x / units.hbar).sin());
    value.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeMetrics {
    pub visibility: f64,
    /// `None` when no oscillation is detectable.
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenPattern {
    pub grid: Grid1D,
    pub intensity: Vec<f64>,
    /// Raw bin counts when the pattern is a histogram.
    pub counts: Option<Vec<u64>>,
    /// Total samples offered, including any that fell outside the grid.
    pub samples: u64,
    pub visibility: f64,
    pub period: Option<f64>,
}

impl ScreenPattern {
    /// Pattern from point values of a density (no binning).
    pub fn from_intensity(grid: Grid1D, intensity: Vec<f64>) -> Result<Self> {
        if intensity.len() != grid.n_points() {
            return Err(Error::GridMismatch);
        }
        if intensity.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain("intensity must be finite and >= 0".into()));
        }
        let mut pattern = Self {
            grid,
            intensity,
            counts: None,
            samples: 0,
            visibility: 0.0,
            period: None,
        };
        let m = fringe_metrics(&pattern);
        pattern.visibility = m.visibility;
        pattern.period = m.period;
        Ok(pattern)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,intensity")?;
        for (i, v) in self.intensity.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.grid.x(i), v)?;
        }
        Ok(())
    }
}

/// Histograms screen hits into the cells of `grid` and normalizes to a
/// density (per unit length, relative to all samples offered).
pub fn accumulate_screen(samples: &[f64], grid: Grid1D) -> Result<ScreenPattern> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no screen samples"));
    }
    let mut counts = vec![0u64; grid.n_points()];
    for &x in samples {
        if let Some(i) = grid.cell_of(x) {
            counts[i] += 1;
        }
    }
    let scale = 1.0 / (samples.len() as f64 * grid.dx());
    let intensity = counts.iter().map(|&c| c as f64 * scale).collect();
    let mut pattern = ScreenPattern {
        grid,
        intensity,
        counts: Some(counts),
        samples: samples.len() as u64,
        visibility: 0.0,
        period: None,
    };
    let m = fringe_metrics(&pattern);
    pattern.visibility = m.visibility;
    pattern.period = m.period;
    Ok(pattern)
}

/// Least-squares fit of `basis` to `(x, y)` pairs.
fn least_squares(xs: &[f64], ys: &[f64], basis: &dyn Fn(f64) -> Vec<f64>, m: usize) -> Option<Vec<f64>> {
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let b = basis(x);
        for r in 0..m {
            for c in r..m {
                a[r][c] += b[r] * b[c];
            }
            a[r][m] += b[r] * y;
        }
    }
    for r in 0..m {
        for c in 0..r {
            a[r][c] = a[c][r];
        }
    }
    solve_augmented(a)
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-12 {
        1.0
    } else {
        z.sin() / z
    }
}

/// Estimates fringe visibility and period.
///
/// The period comes from a least-squares sinusoid search (with a quadratic
/// background) over the window `mean +- std` of the intensity profile,
/// restricted to periods that fit at least [`MIN_PERIODS_IN_WINDOW`] times.
/// The visibility is `sqrt(b^2 + c^2) / a` for `a + b sin(kx) + c cos(kx)`
/// fitted over the central `+-2` periods, corrected for bin averaging when
/// the pattern is a histogram.
pub fn fringe_metrics(pattern: &ScreenPattern) -> FringeMetrics {
    let flat = FringeMetrics {
        visibility: 0.0,
        period: None,
    };
    let grid = &pattern.grid;
    let dx = grid.dx();
    let xs = grid.points();
    let ys = &pattern.intensity;
    let total: f64 = ys.iter().sum();
    if !(total > 0.0) {
        return flat;
    }
    let mean = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / total;
    let spread = (xs.iter().zip(ys).map(|(x, y)| (x - mean).powi(2) * y).sum::<f64>() / total).sqrt();
    if !(spread > 0.0) {
        return flat;
    }

    let (wx, wy): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, _)| (*x - mean).abs() <= spread)
        .map(|(x, y)| (*x, *y))
        .unzip();
    let width = 2.0 * spread;
    let k_min = 2.0 * PI * MIN_PERIODS_IN_WINDOW / width;
    let k_max = PI / dx * 0.95;
    if wx.len() < 16 || k_min >= k_max {
        return flat;
    }
    let power = |k: f64| -> f64 {
        let basis = |x: f64| {
            let u = (x - mean) / spread;
            vec![1.0, u, u * u, (k * x).sin(), (k * x).cos()]
        };
        least_squares(&wx, &wy, &basis, 5).map_or(0.0, |c| c[3] * c[3] + c[4] * c[4])
    };
    let step = PI / (2.0 * width);
    let mut best = (k_min, power(k_min));
    let mut k = k_min + step;
    while k <= k_max {
        let p = power(k);
        if p > best.1 {
            best = (k, p);
        }
        k += step;
    }
    // golden-section refinement
    let (mut a, mut b) = ((best.0 - step).max(k_min), (best.0 + step).min(k_max));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut pc, mut pd) = (power(c), power(d));
    for _ in 0..60 {
        if pc > pd {
            b = d;
            d = c;
            pd = pc;
            c = b - ratio * (b - a);
            pc = power(c);
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + ratio * (b - a);
            pd = power(d);
        }
    }
    let k_star = 0.5 * (a + b);
    let period = 2.0 * PI / k_star;

    let (vx, vy): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, _)| (*x - mean).abs() <= 2.0 * period)
        .map(|(x, y)| (*x, *y))
        .unzip();
    if vx.len() < 5 {
        return flat;
    }
    let basis = |x: f64| vec![1.0, (k_star * x).sin(), (k_star * x).cos()];
    let Some(coef) = least_squares(&vx, &vy, &basis, 3) else {
        return flat;
    };
    if !(coef[0] > 0.0) {
        return flat;
    }
    let attenuation = if pattern.counts.is_some() {
        sinc(0.5 * k_star * dx)
    } else {
        1.0
    };
    let visibility = ((coef[1].hypot(coef[2]) / coef[0]) / attenuation).clamp(0.0, 1.0);

    let mut threshold = MIN_DETECTABLE_VISIBILITY;
    if let Some(counts) = &pattern.counts {
        let in_window: u64 = counts
            .iter()
            .enumerate()
            .filter(|(i, _)| (grid.x(*i) - mean).abs() <= 2.0 * period)
            .map(|(_, c)| *c)
            .sum();
        threshold = threshold.max(5.0 * (2.0 / in_window.max(1) as f64).sqrt());
    }
    FringeMetrics {
        visibility,
        period: (visibility >= threshold).then_some(period),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn units() -> UnitSystem {
        UnitSystem::default()
    }

    #[test]
    fn alpha_out_of_range_is_rejected() {
        let g = Grid1D::symmetric(20.0, 256).unwrap();
        let psi = WaveFunction::gaussian(g, 5.0, 1.0, 0.0, &units()).unwrap();
        assert!(matches!(beam_split(&psi, 1.2), Err(Error::Domain(_))));
        assert!(beam_split(&psi, -0.1).is_err());
    }

    #[test]
    fn full_transmission_returns_first_arm() {
        let g = Grid1D::symmetric(20.0, 256).unwrap();
        let psi = WaveFunction::gaussian(g, 5.0, 1.0, 1.0, &units()).unwrap();
        let split = beam_split(&psi, 1.0).unwrap();
        let state = split.physical_state().unwrap();
        for (a, b) in state.amplitudes().iter().zip(psi.amplitudes()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn split_weights() {
        let g = Grid1D::symmetric(20.0, 256).unwrap();
        let psi = WaveFunction::gaussian(g, 6.0, 1.0, 0.0, &units()).unwrap();
        let split = beam_split(&psi, 0.6).unwrap();
        let (w1, w2) = split.weights();
        assert_abs_diff_eq!(w1, 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(w2, 0.64, epsilon = 1e-12);
        let state = split.physical_state().unwrap();
        assert_abs_diff_eq!(state.mass_in(0.0, 20.0), 0.36, epsilon = 1e-9);
        assert_abs_diff_eq!(state.mass_in(-20.0, 0.0), 0.64, epsilon = 1e-9);
        let balanced = beam_split(&psi, 0.5f64.sqrt()).unwrap().weights();
        assert_abs_diff_eq!(balanced.0, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(balanced.1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn narrow_envelope_warns_but_builds() {
        let g = Grid1D::symmetric(20.0, 1024).unwrap();
        let env = GaussianEnvelope::new(0.0, 1.0).unwrap();
        let s = screen_state(g, 0.5f64.sqrt(), 5.0, env, &units()).unwrap();
        let w = s.flatness.unwrap();
        assert_abs_diff_eq!(w.required_sigma, 2.0 * PI, epsilon = 1e-12);
        let wide = screen_state(g, 0.5f64.sqrt(), 5.0, GaussianEnvelope::new(0.0, 6.5).unwrap(), &units());
        assert!(wide.unwrap().flatness.is_none());
    }

    #[test]
    fn analytic_intensity_edge_cases() {
        let env = GaussianEnvelope::new(1.0, 4.0).unwrap();
        let n2 = 1.0 / ((2.0 * PI).sqrt() * 4.0);
        for x in [-3.0, 0.2, 2.5] {
            let g = env.amplitude(x);
            assert_abs_diff_eq!(intensity_analytic(x, 1.0, 5.0, env, &units()), n2 * g * g, epsilon = 1e-15);
            let gm = env.amplitude(-x);
            assert_abs_diff_eq!(intensity_analytic(x, 0.0, 5.0, env, &units()), n2 * gm * gm, epsilon = 1e-15);
        }
        let balanced = intensity_analytic(0.0, 0.5f64.sqrt(), 5.0, env, &units());
        let g0 = env.amplitude(0.0);
        assert_abs_diff_eq!(balanced, n2 * g0 * g0, epsilon = 1e-15);
    }

    #[test]
    fn flat_pattern_has_no_period() {
        let g = Grid1D::symmetric(50.0, 1024).unwrap();
        let env = GaussianEnvelope::new(0.0, 8.0).unwrap();
        let intensity = g.points().iter().map(|&x| intensity_analytic(x, 1.0, 5.0, env, &units())).collect();
        let p = ScreenPattern::from_intensity(g, intensity).unwrap();
        assert!(p.visibility < 1e-2, "{}", p.visibility);
        assert!(p.period.is_none());
    }

    #[test]
    fn empty_accumulation_fails() {
        let g = Grid1D::symmetric(5.0, 64).unwrap();
        assert!(matches!(accumulate_screen(&[], g), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn csv_header_and_rows() {
        let g = Grid1D::symmetric(5.0, 16).unwrap();
        let p = ScreenPattern::from_intensity(g, vec![0.1; 16]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,intensity"));
        assert_eq!(lines.count(), 16);
    }
}
