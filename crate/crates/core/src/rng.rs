//! Seeded random streams.
//!
//! All randomness goes through ChaCha8 seeded with `seed_from_u64`, one
//! independent stream per purpose (noise, excitation, warm-up, ...). Gaussian
//! draws use the Ziggurat sampler of `rand_distr::StandardNormal`. Results are
//! bit-reproducible for a given `(seed, stream)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::Mat;

/// Named stream identifiers so that different consumers of one seed never
/// share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Noise = 1,
    Excitation = 2,
    WarmUp = 3,
    Probe = 4,
    ClosedLoopNoise = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `rows x cols` matrix of independent standard normals, filled column by
/// column (time-major for signals).
pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}
