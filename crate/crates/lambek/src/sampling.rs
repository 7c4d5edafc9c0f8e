//! Reproducible random density operators.
//!
//! Lexicon generators and randomised checks draw from independent ChaCha8
//! streams keyed by a seed and a label, so that adding a word or reordering
//! a file never changes the values generated for other entries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::{Matrix, C64};

/// 64-bit FNV-1a offset basis.
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
/// 64-bit FNV-1a prime.
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// A random stream determined by `seed` and the labels `parts`.
pub fn stream(seed: u64, parts: &[&str]) -> ChaCha8Rng {
    let mut hash = FNV_OFFSET;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            hash ^= u64::from(*b);
            hash = hash.wrapping_mul(FNV_PRIME);
        }
    };
    feed(&seed.to_le_bytes());
    for part in parts {
        feed(part.as_bytes());
        feed(&[0xff]);
    }
    ChaCha8Rng::seed_from_u64(hash)
}

/// A full-rank random density operator: a random Hermitian matrix with
/// entries in `[-1, 1]` (real and imaginary parts), shifted so that its
/// smallest eigenvalue is `1/2`, then trace-normalised.
pub fn random_density<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let mut h = Matrix::zeros(n);
    for i in 0..n {
        h.set(i, i, C64::new(rng.gen_range(-1.0..=1.0), 0.0));
        for j in i + 1..n {
            let z = C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            h.set(i, j, z);
            h.set(j, i, z.conj());
        }
    }
    let min = h
        .eigh()
        .map(|(values, _)| values.first().copied().unwrap_or(0.0))
        .unwrap_or(0.0);
    let shifted = h.add(&Matrix::identity(n).scale(C64::new(0.5 - min, 0.0)));
    let trace = shifted.trace().re;
    shifted.scale(C64::new(1.0 / trace, 0.0)).hermitian_part()
}

/// A random diagonal density operator with entries drawn from `[0.2, 1]`
/// before normalisation, so that no basis state dominates.
pub fn random_diagonal_density<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..=1.0)).collect();
    let total: f64 = values.iter().sum();
    Matrix::diagonal(&values.iter().map(|v| v / total).collect::<Vec<_>>())
}
