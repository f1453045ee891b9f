//! Small dense hermitian linear algebra: cyclic Jacobi eigensolver and the
//! unitary maps built from it.
//!
//! Everything here targets the modest dimensions of this crate (a few hundred
//! at most), where Jacobi iteration is simple and accurate to machine
//! precision.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

/// Eigendecomposition of a hermitian matrix: `matrix = V diag(values) V^dag`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, ascending.
    pub values: Array1<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: Array2<C64>,
}

impl HermitianEigen {
    /// `V diag(f(lambda)) V^dag` for a scalar map `f` of the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Array2<C64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, lam) in self.values.iter().enumerate() {
            let fl = f(*lam);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += scaled[(i, k)] * self.vectors[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// The unitary `exp(-i t H)` reconstructed from this decomposition.
    pub fn evolution(&self, t: f64) -> Array2<C64> {
        self.map(|lam| C64::from_polar(1.0, -lam * t))
    }

    /// Apply `V diag(f(lambda)) V^dag` to a vector without forming the matrix.
    pub fn apply_map(&self, f: impl Fn(f64) -> C64, v: &Array1<C64>) -> Array1<C64> {
        let n = self.values.len();
        // coords = V^dag v
        let mut coords = Array1::zeros(n);
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                acc += self.vectors[(i, j)].conj() * v[i];
            }
            coords[j] = acc * f(self.values[j]);
        }
        let mut out = Array1::zeros(n);
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.vectors[(i, j)] * coords[j];
            }
            out[i] = acc;
        }
        out
    }
}

/// Eigendecomposition of a hermitian matrix by cyclic Jacobi rotations.
///
/// The caller is responsible for hermiticity; only the upper triangle and the
/// real part of the diagonal are read.
pub fn hermitian_eigen(matrix: &Array2<C64>) -> HermitianEigen {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "hermitian_eigen needs a square matrix");
    let mut a = matrix.clone();
    let mut v: Array2<C64> = Array2::eye(n);

    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 || n == 1 {
        let values = Array1::from_iter((0..n).map(|i| a[(i, i)].re));
        return sorted(values, v);
    }
    let tol = 1e-15 * scale;

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag; // a_pq = mag * phase
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G restricted to (p,q): [[c, s], [-s*conj(phase), c*conj(phase)]]
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -s * phase.conj();
                let gqq = c * phase.conj();
                // columns: A <- A G, V <- V G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
                // rows: A <- G^dag A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let values = Array1::from_iter((0..n).map(|i| a[(i, i)].re));
    sorted(values, v)
}

fn sorted(values: Array1<f64>, vectors: Array2<C64>) -> HermitianEigen {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let sorted_values = Array1::from_iter(order.iter().map(|&i| values[i]));
    let mut sorted_vectors = Array2::zeros((n, n));
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            sorted_vectors[(i, new_j)] = vectors[(i, old_j)];
        }
    }
    HermitianEigen {
        values: sorted_values,
        vectors: sorted_vectors,
    }
}

/// Trace distance `0.5 ||rho - sigma||_1` between two hermitian matrices.
pub fn trace_distance(rho: &Array2<C64>, sigma: &Array2<C64>) -> f64 {
    let diff = rho - sigma;
    let eig = hermitian_eigen(&diff);
    0.5 * eig.values.iter().map(|x| x.abs()).sum::<f64>()
}
