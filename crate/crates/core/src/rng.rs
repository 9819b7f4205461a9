//! Seeded random streams.
//!
//! Every random draw in the library comes from a ChaCha stream keyed by a
//! user seed plus a fixed stream id, so independent consumers never share
//! state and results depend only on `(seed, stream)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::autodiff::Tensor;

pub type SeededRng = ChaCha8Rng;

pub mod stream {
    pub const BASE_POINTS: u64 = 1;
    pub const INIT: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const SHUFFLE: u64 = 4;
    pub const DATA: u64 = 5;
    pub const SURFACES: u64 = 6;
    pub const EVAL: u64 = 7;
}

pub fn seeded(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `rows x cols` matrix of independent standard normal draws.
pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Tensor {
    let values = (0..rows * cols)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Tensor::new(vec![rows, cols], values).expect("finite normal draws")
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}
