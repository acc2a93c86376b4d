//! Deterministic chart-point sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::models::Chart;

pub const DEFAULT_SEED: u64 = 42;

/// Sampling box for upper-half-space style charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    pub x_n_range: [f64; 2],
    pub tangential_bound: f64,
}

impl Default for SamplingBox {
    fn default() -> Self {
        SamplingBox {
            x_n_range: [0.5, 5.0],
            tangential_bound: 3.0,
        }
    }
}

pub struct Sampler {
    rng: ChaCha8Rng,
    bounds: SamplingBox,
}

impl Sampler {
    pub fn new(seed: u64, bounds: SamplingBox) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            bounds,
        }
    }

    /// Tangential coordinates in `[-bound, bound]`, the last one in `x_n_range`.
    pub fn half_space_point(&mut self, n: usize) -> Vec<f64> {
        let t = self.bounds.tangential_bound;
        let [lo, hi] = self.bounds.x_n_range;
        let mut p: Vec<f64> = (0..n - 1).map(|_| self.uniform(-t, t)).collect();
        p.push(self.uniform(lo, hi));
        p
    }

    pub fn chart_point(&mut self, chart: Chart, dim: usize) -> Vec<f64> {
        match chart {
            Chart::UpperHalfSpace => self.half_space_point(dim),
            Chart::Cartesian | Chart::Stereographic => {
                let t = self.bounds.tangential_bound;
                (0..dim).map(|_| self.uniform(-t, t)).collect()
            }
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            self.rng.gen_range(lo..hi)
        }
    }
}
