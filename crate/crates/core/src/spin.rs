//! Spin-1/2 building blocks.
//!
//! Basis convention used throughout the crate: index 0 is the lower level
//! (|g>, lattice |0>, m = -1/2) and index 1 the upper level (|e>, lattice
//! |1>, m = +1/2), so `jz = diag(-1/2, +1/2)`. The ladder convention is the
//! standard one, `j+ = jx + i jy` raising index 0 to index 1.

use ndarray::{array, Array2};
use num_complex::Complex64 as C64;

/// Spin axes for pulses and measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn jx() -> Array2<C64> {
    array![
        [C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
        [C64::new(0.5, 0.0), C64::new(0.0, 0.0)]
    ]
}

pub fn jy() -> Array2<C64> {
    array![
        [C64::new(0.0, 0.0), C64::new(0.0, 0.5)],
        [C64::new(0.0, -0.5), C64::new(0.0, 0.0)]
    ]
}

pub fn jz() -> Array2<C64> {
    array![
        [C64::new(-0.5, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(0.5, 0.0)]
    ]
}

pub fn j(axis: Axis) -> Array2<C64> {
    match axis {
        Axis::X => jx(),
        Axis::Y => jy(),
        Axis::Z => jz(),
    }
}

/// Pauli matrix `sigma = 2 j` for the given axis.
pub fn pauli(axis: Axis) -> Array2<C64> {
    j(axis).mapv(|z| z * 2.0)
}

/// Single-spin rotation `exp(-i angle j_axis)` as a dense 2x2.
pub fn rotation(axis: Axis, angle: f64) -> Array2<C64> {
    // exp(-i angle sigma/2) = cos(angle/2) I - i sin(angle/2) sigma
    let c = C64::new((angle / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(angle / 2.0).sin());
    let sigma = pauli(axis);
    let mut out = sigma.mapv(|z| z * s);
    out[(0, 0)] += c;
    out[(1, 1)] += c;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
        a.dot(b)
    }

    #[test]
    fn su2_commutator() {
        // [jx, jy] = i jz
        let lhs = matmul(&jx(), &jy()) - matmul(&jy(), &jx());
        let rhs = jz().mapv(|z| z * C64::new(0.0, 1.0));
        for i in 0..2 {
            for j in 0..2 {
                assert!((lhs[(i, j)] - rhs[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ladder_raises_ground() {
        // j+ = jx + i jy maps index 0 to index 1 with unit amplitude
        let jplus = jx() + jy().mapv(|z| z * C64::new(0.0, 1.0));
        assert!((jplus[(1, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(jplus[(0, 0)].norm() < 1e-15);
        assert!(jplus[(0, 1)].norm() < 1e-15);
        assert!(jplus[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn rotation_is_unitary_and_periodic() {
        let r = rotation(Axis::Y, 0.7);
        let rd = r.t().mapv(|z| z.conj());
        let id = rd.dot(&r);
        assert!((id[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(id[(0, 1)].norm() < 1e-15);
        // two pi pulses about x give a global minus sign
        let r2 = rotation(Axis::X, std::f64::consts::PI);
        let sq = r2.dot(&r2);
        assert!((sq[(0, 0)] + C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(sq[(0, 1)].norm() < 1e-14);
    }
}
