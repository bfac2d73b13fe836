//! Seeded inverse-CDF sampling from grid densities.
//!
//! Every random draw comes from a ChaCha20 stream selected by `(seed, stream)`.
//! Bulk sampling is cut into fixed-size chunks, chunk `c` using stream `c`, so
//! results never depend on how many worker threads run the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, WaveFunction};

/// Samples per independently seeded chunk.
pub const CHUNK_SIZE: usize = 1 << 16;

pub type StreamRng = ChaCha20Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `fill(rng, count)` over `n` draws split into [`CHUNK_SIZE`] chunks and
/// concatenates the chunks in order.
pub fn chunked<T, F>(n: usize, seed: u64, fill: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, usize) -> Vec<T> + Sync,
{
    let chunks = n.div_ceil(CHUNK_SIZE);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
            let mut rng = stream_rng(seed, c as u64);
            fill(&mut rng, count)
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Exact inverse-CDF sampler for the piecewise-constant density that puts
/// mass `p_i` uniformly on grid cell `i`.
#[derive(Debug, Clone)]
pub struct GridSampler {
    grid: Grid1D,
    cdf: Vec<f64>,
}

impl GridSampler {
    pub fn new(grid: Grid1D, weights: &[f64]) -> Result<Self> {
        if weights.len() != grid.n_points() {
            return Err(Error::GridMismatch);
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain("density weights must be finite and >= 0".into()));
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if acc <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        cdf.iter_mut().for_each(|c| *c /= acc);
        Ok(Self { grid, cdf })
    }

    pub fn from_wave_function(psi: &WaveFunction) -> Result<Self> {
        Self::new(*psi.grid(), &psi.probability_density())
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Maps `u` in `[0, 1)` to a position.
    pub fn position(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|c| *c <= u).min(self.cdf.len() - 1);
        let lo = if i == 0 { 0.0 } else { self.cdf[i - 1] };
        let p = self.cdf[i] - lo;
        let frac = if p > 0.0 { ((u - lo) / p).clamp(0.0, 1.0) } else { 0.5 };
        let dx = self.grid.dx();
        self.grid.x(i) - 0.5 * dx + frac * dx
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.position(rng.random::<f64>())
    }

    /// Continuous CDF of the sampled (piecewise-constant) density.
    pub fn cdf(&self, x: f64) -> f64 {
        let dx = self.grid.dx();
        let s = (x - self.grid.x_min()) / dx + 0.5;
        if s <= 0.0 {
            return 0.0;
        }
        let i = s.floor() as usize;
        if i >= self.cdf.len() {
            return 1.0;
        }
        let lo = if i == 0 { 0.0 } else { self.cdf[i - 1] };
        lo + (self.cdf[i] - lo) * (s - i as f64)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        chunked(n, seed, |rng, count| (0..count).map(|_| self.draw(rng)).collect())
    }
}
