//! Seeded sampling of vectors and matrices.
//!
//! Every stochastic routine draws from `rng(seed, stream)`, so independent
//! restarts or samples get their own reproducible generator.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::Matrix;
use crate::scalar::C;

pub type SeededRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for `(seed, stream)`.
pub fn rng(seed: u64, stream: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(stream)))
}

pub fn gaussian(r: &mut impl Rng) -> f64 {
    r.sample(StandardNormal)
}

pub fn complex_gaussian(r: &mut impl Rng) -> C<f64> {
    Complex::new(gaussian(r), gaussian(r))
}

pub fn gaussian_vector(r: &mut impl Rng, d: usize) -> Vec<C<f64>> {
    (0..d).map(|_| complex_gaussian(r)).collect()
}

/// Haar-random unit vector in `ℂ^d`.
pub fn unit_vector(r: &mut impl Rng, d: usize) -> Vec<C<f64>> {
    loop {
        let v = gaussian_vector(r, d);
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(r: &mut impl Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| complex_gaussian(r))
}

/// Wishart `G G* / rank` with `G` a `d × rank` Ginibre matrix.
pub fn wishart(r: &mut impl Rng, d: usize, rank: usize) -> Matrix<f64> {
    let g = ginibre(r, d, rank.max(1));
    g.matmul(&g.adjoint()).scale_real(1.0 / rank.max(1) as f64)
}

/// Random hermitian with Gaussian entries.
pub fn hermitian(r: &mut impl Rng, d: usize) -> Matrix<f64> {
    ginibre(r, d, d).hermitian_part()
}

/// Random density matrix (trace one, full rank almost surely).
pub fn density(r: &mut impl Rng, d: usize) -> Matrix<f64> {
    let w = wishart(r, d, d);
    let t = w.trace().re;
    w.scale_real(1.0 / t)
}
