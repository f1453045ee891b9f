//! Oracles shared by unit tests: routes independent of the production code
//! paths they check.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

/// `exp(scale * M)` by scaling-and-squaring Taylor summation. Slow and
/// simple on purpose: independent of the Jacobi eigensolver used by the
/// production propagators.
pub fn expm_taylor(m: &Array2<C64>, scale: C64) -> Array2<C64> {
    let n = m.nrows();
    let a = m.mapv(|z| z * scale);
    let norm: f64 = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let a_scaled = a.mapv(|z| z / 2f64.powi(squarings as i32));
    let mut result = Array2::<C64>::eye(n);
    let mut term = Array2::<C64>::eye(n);
    for k in 1..=30 {
        term = term.dot(&a_scaled).mapv(|z| z / k as f64);
        result = result + &term;
        let biggest: f64 = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if biggest < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// Random normalized complex vector from a seeded stream.
pub fn random_state(dim: usize, seed: u64) -> Array1<C64> {
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v = Array1::from_iter(
        (0..dim).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
    );
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / norm);
    v
}
