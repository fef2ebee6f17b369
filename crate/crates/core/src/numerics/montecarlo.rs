use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::sqrt;
use crate::{Error, Result};

/// Number of independent generator streams a Monte Carlo run is split into.
/// Fixed so that results never depend on how blocks are scheduled.
pub const MC_BLOCKS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSpec {
    samples: u64,
    seed: u64,
}

impl McSpec {
    pub const MIN_SAMPLES: u64 = 10_000;

    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        if samples < Self::MIN_SAMPLES {
            return Err(Error::domain("samples", samples as f64, "at least 10^4 samples"));
        }
        Ok(McSpec { samples, seed })
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator and sample count for block `index < MC_BLOCKS`.
    pub fn block(&self, index: u64) -> (ChaCha8Rng, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let base = self.samples / MC_BLOCKS;
        let extra = u64::from(index < self.samples % MC_BLOCKS);
        (rng, base + extra)
    }

    /// Runs `draw` for every sample of block `index`.
    pub fn run_block<const K: usize>(
        &self,
        index: u64,
        mut draw: impl FnMut(&mut ChaCha8Rng) -> [f64; K],
    ) -> Moments<K> {
        let (mut rng, n) = self.block(index);
        let mut acc = Moments::new();
        for _ in 0..n {
            acc.push(&draw(&mut rng));
        }
        acc
    }
}

/// Uniform deviate on `(0, 1]` built from the top 53 bits of a `u64`.
pub fn uniform_open(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Streaming mean and co-moment matrix of `K` jointly observed quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<const K: usize> {
    n: u64,
    mean: [f64; K],
    co: [[f64; K]; K],
}

impl<const K: usize> Default for Moments<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<const K: usize> Moments<K> {
    pub fn new() -> Self {
        Moments {
            n: 0,
            mean: [0.0; K],
            co: [[0.0; K]; K],
        }
    }

    pub fn push(&mut self, x: &[f64; K]) {
        self.n += 1;
        let n = self.n as f64;
        let mut before = [0.0; K];
        for k in 0..K {
            before[k] = x[k] - self.mean[k];
            self.mean[k] += before[k] / n;
        }
        for i in 0..K {
            let after = x[i] - self.mean[i];
            for j in 0..K {
                self.co[i][j] += after * before[j];
            }
        }
    }

    /// Combines two disjoint sample sets.
    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let mut delta = [0.0; K];
        for k in 0..K {
            delta[k] = other.mean[k] - self.mean[k];
        }
        for i in 0..K {
            for j in 0..K {
                self.co[i][j] += other.co[i][j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for k in 0..K {
            self.mean[k] += delta[k] * nb / n;
        }
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> [f64; K] {
        self.mean
    }

    /// Unbiased sample covariance of quantities `i` and `j`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.co[i][j] / (self.n - 1) as f64
    }

    /// Standard error of the mean of quantity `k`.
    pub fn std_err(&self, k: usize) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        sqrt(self.covariance(k, k).max(0.0) / self.n as f64)
    }

    /// Mean of `x_i / x_j` as a ratio of means, with delta-method error.
    pub fn ratio(&self, i: usize, j: usize) -> (f64, f64) {
        let (mi, mj) = (self.mean[i], self.mean[j]);
        let r = mi / mj;
        let var = (self.covariance(i, i) - 2.0 * r * self.covariance(i, j)
            + r * r * self.covariance(j, j))
            / (mj * mj);
        (r, sqrt(var.max(0.0) / self.n as f64))
    }
}

/// Sample moments of `draw` over all blocks, merged in block order.
pub fn mc_moments<const K: usize>(
    spec: &McSpec,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> [f64; K],
) -> Moments<K> {
    let mut total = Moments::new();
    for index in 0..MC_BLOCKS {
        total.merge(&spec.run_block(index, &mut draw));
    }
    total
}

/// Mean and standard error of `g` applied to draws from `sampler`.
pub fn mc_expectation<X>(
    sampler: impl Fn(&mut ChaCha8Rng) -> X,
    g: impl Fn(X) -> f64,
    spec: &McSpec,
) -> (f64, f64) {
    let m = mc_moments(spec, |rng| [g(sampler(rng))]);
    (m.mean()[0], m.std_err(0))
}
