//! Oracle helpers for the acceptance suite, independent of the production
//! evolution paths they check.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

/// `exp(scale * M)` by scaling-and-squaring Taylor summation (independent of
/// the Jacobi eigensolver inside the engines).
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

/// Norm of the difference after aligning global phases.
pub fn phase_aligned_error(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (y - x * phase).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Least-squares slope of y(x).
pub fn linear_fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Exact binomial coefficient as f64 (n small).
pub fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Golden-section minimum refinement on [lo, hi].
pub fn golden_min(mut lo: f64, mut hi: f64, tol: f64, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let xm = (lo + hi) / 2.0;
    (xm, f(xm))
}
