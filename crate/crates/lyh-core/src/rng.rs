//! Seeded, counter-based random streams.
//!
//! Every independent task (restart, operator, field) draws from its own
//! ChaCha20 stream selected by `(seed, stream)`, so results do not depend on
//! how tasks are scheduled across threads.

use crate::scalar::C64;
use crate::tensor::linalg::{orthonormalize, CMat};
use crate::tensor::CxMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

/// Algorithm identifier written into run manifests.
pub const RNG_ALGORITHM: &str = "chacha20/rand_chacha-0.9/seed_from_u64+set_stream";

pub type Stream = ChaCha20Rng;

pub fn stream(seed: u64, index: u64) -> Stream {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Mixes a label into a seed so different experiment families never share streams.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    label.bytes().fold(seed ^ 0x9e37_79b9_7f4a_7c15, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn normal(r: &mut Stream) -> f64 {
    r.sample(StandardNormal)
}

/// Standard complex Gaussian with `E|z|² = 1`.
pub fn complex_normal(r: &mut Stream) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    C64::new(normal(r) * s, normal(r) * s)
}

pub fn complex_vec(r: &mut Stream, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_normal(r)).collect()
}

pub fn uniform(r: &mut Stream, lo: f64, hi: f64) -> f64 {
    r.random_range(lo..hi)
}

pub fn complex_matrix(r: &mut Stream, rows: usize, cols: usize) -> CMat {
    CxMatrix::from_fn(rows, cols, |_, _| complex_normal(r))
}

/// Random Hermitian matrix (GUE-like scaling).
pub fn hermitian(r: &mut Stream, n: usize) -> CMat {
    let g = complex_matrix(r, n, n);
    (&g + &g.adjoint()).scale_re(0.5)
}

/// `m×p` matrix with orthonormal columns, Haar-distributed up to phases.
pub fn unitary_frame(r: &mut Stream, m: usize, p: usize) -> CMat {
    orthonormalize(&complex_matrix(r, m, p))
}

pub fn unit_vector(r: &mut Stream, n: usize) -> Vec<C64> {
    let v = complex_vec(r, n);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}
