//! Seeded sampling of points in coordinate boxes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Half-open box `[lo, hi)` per coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<const N: usize> {
    pub lo: [f64; N],
    pub hi: [f64; N],
}

impl<const N: usize> Bounds<N> {
    pub const fn new(lo: [f64; N], hi: [f64; N]) -> Self {
        Self { lo, hi }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> [f64; N] {
        std::array::from_fn(|i| rng.random_range(self.lo[i]..self.hi[i]))
    }

    pub fn sample_n(&self, rng: &mut impl Rng, n: usize) -> Vec<[f64; N]> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// Car configurations: `x, y` in [-1, 1], any heading, steering well
/// inside (-π/2, π/2).
pub const CAR_BOX: Bounds<4> = Bounds::new(
    [-1.0, -1.0, -std::f64::consts::PI, -1.3],
    [1.0, 1.0, std::f64::consts::PI, 1.3],
);

/// Second-jet points with `|p|, |q| ≤ 2`.
pub const JET_BOX: Bounds<4> = Bounds::new([-1.0, -1.0, -2.0, -2.0], [1.0, 1.0, 2.0, 2.0]);
