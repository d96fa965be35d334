//! Deterministic quasi-random point clouds (Halton sequence).

use crate::field::StateVector;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`, in `[0, 1)`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// `count` Halton points in the box `[lo, hi]^dim`, starting at index 1.
///
/// # Panics
///
/// If `dim` exceeds 16.
pub fn halton_box(dim: usize, count: usize, lo: f64, hi: f64) -> Vec<StateVector> {
    assert!(
        dim <= PRIMES.len(),
        "halton_box supports at most {} dimensions",
        PRIMES.len()
    );
    (1..=count as u64)
        .map(|k| {
            StateVector::from_iterator(
                dim,
                PRIMES[..dim].iter().map(|&b| lo + (hi - lo) * radical_inverse(k, b)),
            )
        })
        .collect()
}
