//! Seeded fixtures shared by the criterion benches.

use condlab::rng::{substream, NormalSampler};
use condlab::Matrix;

/// Dense `n x n` matrix with iid N(0, 1) entries.
pub fn gaussian_matrix(n: usize, seed: u64) -> Matrix {
    let mut g = NormalSampler::new(substream(seed, n as u64, 0));
    Matrix::new(n, n, g.sample_vec(n * n)).expect("finite draws")
}

/// Lower triangular matrix with iid N(0, 1) entries on and below the diagonal.
pub fn lower_gaussian(n: usize, seed: u64) -> Matrix {
    let mut l = gaussian_matrix(n, seed);
    for i in 0..n {
        for j in (i + 1)..n {
            l[(i, j)] = 0.0;
        }
    }
    l
}

pub fn gaussian_vector(n: usize, seed: u64) -> Vec<f64> {
    NormalSampler::new(substream(seed, n as u64, 1)).sample_vec(n)
}
