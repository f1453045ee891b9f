//! Composite-Hilbert-space state vectors, operator construction, and time
//! evolution primitives shared by the physics modules.
//!
//! Subsystem ordering convention: the leftmost subsystem varies slowest in
//! the amplitude index (qubits first, a vibrational mode last when present).

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default local error tolerance per unit time for [`evolve_ode`].
pub const DEFAULT_ODE_TOL: f64 = 1e-8;

/// Norm drift beyond this after an evolution call is treated as an
/// integrator misconfiguration rather than silently renormalized.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Pure state on a composite Hilbert space.
#[derive(Debug, Clone)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Array1<C64>,
}

impl StateVector {
    /// Build from explicit amplitudes; the norm must already be 1 within 1e-9.
    pub fn new(dims: Vec<usize>, amps: Array1<C64>) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::invalid("every subsystem dimension must be >= 2"));
        }
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "state amplitudes vs subsystem dimensions",
                expected: dim,
                got: amps.len(),
            });
        }
        let state = StateVector { dims, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "state norm {norm} differs from 1 by more than 1e-9"
            )));
        }
        Ok(state)
    }

    /// Build from unnormalized amplitudes, rescaling to unit norm.
    pub fn from_unnormalized(dims: Vec<usize>, amps: Array1<C64>) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        Self::new(dims, amps.mapv(|z| z / norm))
    }

    /// Basis state |index> of the composite space.
    pub fn basis_state(dims: Vec<usize>, index: usize) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if index >= dim {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = Array1::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context: "inner product",
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// State fidelity `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub(crate) fn with_amps(&self, amps: Array1<C64>) -> StateVector {
        StateVector {
            dims: self.dims.clone(),
            amps,
        }
    }

    pub(crate) fn renormalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            self.amps.mapv_inplace(|z| z / norm);
        }
    }
}

/// Dense operator on a composite space, with a hermiticity tag.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: Array2<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wrap entries claimed hermitian; verified to 1e-12 elementwise.
    pub fn hermitian(entries: Array2<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::invalid("operator must be square"));
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in i..n {
                if (entries[(i, j)] - entries[(j, i)].conj()).norm() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "entries are not hermitian at ({i},{j})"
                    )));
                }
            }
        }
        Ok(OperatorMatrix {
            entries,
            hermitian: true,
        })
    }

    /// Wrap entries with no hermiticity claim.
    pub fn general(entries: Array2<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::invalid("operator must be square"));
        }
        Ok(OperatorMatrix {
            entries,
            hermitian: false,
        })
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix {
            entries: Array2::eye(dim),
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Apply to a state, keeping its subsystem structure.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if self.dim() != psi.dim() {
            return Err(Error::DimensionMismatch {
                context: "operator applied to state",
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        Ok(psi.with_amps(self.entries.dot(psi.amps())))
    }

    /// Real linear combination of hermitian operators (stays hermitian).
    pub fn hermitian_combination(terms: &[(f64, &OperatorMatrix)]) -> Result<Self> {
        let dim = terms
            .first()
            .ok_or_else(|| Error::invalid("empty combination"))?
            .1
            .dim();
        let mut entries = Array2::zeros((dim, dim));
        for (coeff, op) in terms {
            if !op.hermitian {
                return Err(Error::invalid(
                    "hermitian_combination requires hermitian terms",
                ));
            }
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "operator combination",
                    expected: dim,
                    got: op.dim(),
                });
            }
            entries = entries + op.entries.mapv(|z| z * *coeff);
        }
        Ok(OperatorMatrix {
            entries,
            hermitian: true,
        })
    }
}

/// Tensor product of dense matrices, leftmost factor slowest-varying.
pub fn kron(ops: &[&OperatorMatrix]) -> Result<OperatorMatrix> {
    if ops.is_empty() {
        return Err(Error::invalid("kron of an empty list"));
    }
    let mut entries = ops[0].entries.clone();
    for op in &ops[1..] {
        entries = kron2(&entries, &op.entries);
    }
    let hermitian = ops.iter().all(|op| op.hermitian);
    Ok(OperatorMatrix { entries, hermitian })
}

/// Raw two-factor Kronecker product.
pub fn kron2(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Truncated annihilation operator on an `n_max`-level Fock space.
///
/// `a |n> = sqrt(n) |n-1>`; the raising amplitude sqrt(n+1) is clipped at the
/// truncation boundary.
pub fn annihilation(n_max: usize) -> Array2<C64> {
    let mut a = Array2::zeros((n_max, n_max));
    for n in 1..n_max {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Dimensionless position `x = (a + a^dag)/sqrt(2)` on the truncated space.
pub fn position(n_max: usize) -> Array2<C64> {
    let a = annihilation(n_max);
    let ad = a.t().mapv(|z| z.conj());
    (a + ad).mapv(|z| z / C64::new(2f64.sqrt(), 0.0))
}

/// Dimensionless momentum `p = i (a^dag - a)/sqrt(2)` on the truncated space.
pub fn momentum(n_max: usize) -> Array2<C64> {
    let a = annihilation(n_max);
    let ad = a.t().mapv(|z| z.conj());
    (ad - a).mapv(|z| z * C64::new(0.0, 1.0) / C64::new(2f64.sqrt(), 0.0))
}

/// `<psi| O |psi>` as a complex number.
pub fn expectation(psi: &StateVector, op: &OperatorMatrix) -> Result<C64> {
    let applied = op.apply(psi)?;
    psi.inner(&applied)
}

/// `<psi| O |psi>` for hermitian `O`; errors if the imaginary part leaks
/// above 1e-10.
pub fn expectation_hermitian(psi: &StateVector, op: &OperatorMatrix) -> Result<f64> {
    let z = expectation(psi, op)?;
    if z.im.abs() > 1e-10 {
        return Err(Error::invalid(format!(
            "imaginary part {:.3e} of a hermitian expectation",
            z.im
        )));
    }
    Ok(z.re)
}

/// Exact evolution under a diagonal Hamiltonian: `amps[k] *= exp(-i E_k t)`.
pub fn evolve_diagonal(diag_energies: &[f64], psi: &StateVector, t: f64) -> Result<StateVector> {
    if diag_energies.len() != psi.dim() {
        return Err(Error::DimensionMismatch {
            context: "diagonal energies vs state",
            expected: psi.dim(),
            got: diag_energies.len(),
        });
    }
    let amps = Array1::from_iter(
        psi.amps()
            .iter()
            .zip(diag_energies.iter())
            .map(|(a, e)| a * C64::from_polar(1.0, -e * t)),
    );
    Ok(psi.with_amps(amps))
}

/// Solve `i dpsi/dt = H(t) psi` from `t = 0` to `t_final` (hbar = 1).
///
/// Adaptive Dormand-Prince 5(4); the local error per step is held at or
/// below `tol * step`, so `tol` is a per-unit-time budget. The result is
/// renormalized when the accumulated norm drift is below
/// [`NORM_DRIFT_LIMIT`]; larger drift is reported as an error.
pub fn evolve_ode<H>(h_of_t: H, psi0: &StateVector, t_final: f64, tol: f64) -> Result<StateVector>
where
    H: FnMut(f64) -> OperatorMatrix,
{
    evolve_ode_span(h_of_t, psi0, 0.0, t_final, tol)
}

/// Same as [`evolve_ode`] but integrating over `[t0, t1]`.
pub fn evolve_ode_span<H>(
    mut h_of_t: H,
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<StateVector>
where
    H: FnMut(f64) -> OperatorMatrix,
{
    if !(tol > 0.0) {
        return Err(Error::invalid("ODE tolerance must be positive"));
    }
    if t1 < t0 {
        return Err(Error::invalid("backwards integration span"));
    }
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(psi0.clone());
    }

    let dim = psi0.dim();
    let mut rhs = |t: f64, y: &Array1<C64>| -> Result<Array1<C64>> {
        let h = h_of_t(t);
        if h.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "H(t) vs state",
                expected: dim,
                got: h.dim(),
            });
        }
        if !h.is_hermitian() {
            return Err(Error::invalid("H(t) must be hermitian"));
        }
        // dpsi/dt = -i H psi
        Ok(h.entries().dot(y).mapv(|z| z * C64::new(0.0, -1.0)))
    };

    // Dormand-Prince 5(4) coefficients.
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut y = psi0.amps().clone();
    let mut t = t0;
    // initial step guess from the instantaneous rate of change
    let rate = rhs(t0, &y)?
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let mut h = (0.1 / (rate + 1e-12)).min(span);

    let mut steps: u64 = 0;
    const MAX_STEPS: u64 = 50_000_000;
    while t < t1 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::invalid("ODE step limit exceeded"));
        }
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k: Vec<Array1<C64>> = Vec::with_capacity(7);
        for stage in 0..7 {
            let mut arg = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[stage][j];
                if a != 0.0 {
                    arg.iter_mut()
                        .zip(kj.iter())
                        .for_each(|(v, kv)| *v += *kv * C64::new(a * h, 0.0));
                }
            }
            k.push(rhs(t + C[stage] * h, &arg)?);
        }
        let mut y5 = y.clone();
        let mut err_sq = 0.0f64;
        let mut diff = Array1::<C64>::zeros(dim);
        for (stage, kj) in k.iter().enumerate() {
            let b5 = B5[stage];
            let db = B5[stage] - B4[stage];
            if b5 != 0.0 {
                y5.iter_mut()
                    .zip(kj.iter())
                    .for_each(|(v, kv)| *v += *kv * C64::new(b5 * h, 0.0));
            }
            if db != 0.0 {
                diff.iter_mut()
                    .zip(kj.iter())
                    .for_each(|(v, kv)| *v += *kv * C64::new(db * h, 0.0));
            }
        }
        err_sq += diff.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let err = err_sq.sqrt();
        let budget = tol * h;
        if err <= budget {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (budget / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < span * 1e-14 {
            return Err(Error::invalid("ODE step underflow"));
        }
    }

    let mut out = psi0.with_amps(y);
    let drift = (out.norm() - 1.0).abs();
    if drift >= NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift {
            drift,
            threshold: NORM_DRIFT_LIMIT,
        });
    }
    out.renormalize();
    Ok(out)
}

/// Reduced density matrix over the `keep` subsystems (indices into
/// `psi.dims()`, ascending order preserved in the output).
pub fn partial_trace(psi: &StateVector, keep: &[usize]) -> Result<Array2<C64>> {
    let dims = psi.dims();
    if keep.is_empty() {
        return Err(Error::invalid("keep set must be non-empty"));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return Err(Error::invalid("duplicate subsystem index in keep set"));
    }
    if keep_sorted.iter().any(|&i| i >= dims.len()) {
        return Err(Error::invalid("subsystem index out of range"));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();

    // strides in the flat amplitude index (leftmost slowest)
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept_dim: usize = keep_sorted.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();

    let offset_of = |multi: usize, subsys: &[usize]| -> usize {
        let mut rem = multi;
        let mut off = 0usize;
        for &s in subsys.iter().rev() {
            off += (rem % dims[s]) * strides[s];
            rem /= dims[s];
        }
        off
    };

    let amps = psi.amps();
    let mut rho = Array2::zeros((kept_dim, kept_dim));
    let mut gathered = vec![C64::new(0.0, 0.0); kept_dim];
    for tr in 0..traced_dim {
        let base = offset_of(tr, &traced);
        for (kp, g) in gathered.iter_mut().enumerate() {
            *g = amps[base + offset_of(kp, &keep_sorted)];
        }
        for i in 0..kept_dim {
            for j in 0..kept_dim {
                rho[(i, j)] += gathered[i] * gathered[j].conj();
            }
        }
    }
    Ok(rho)
}

/// Labeled time series of real-valued records.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    times: Vec<f64>,
    labels: Vec<String>,
    records: Vec<Vec<f64>>,
    meta: Vec<(String, String)>,
}

impl TimeSeries {
    pub fn new(labels: Vec<String>) -> Self {
        TimeSeries {
            times: Vec::new(),
            labels,
            records: Vec::new(),
            meta: Vec::new(),
        }
    }

    /// Append a record; times must be strictly increasing.
    pub fn push(&mut self, t: f64, record: Vec<f64>) -> Result<()> {
        if let Some(last) = self.times.last() {
            if t <= *last {
                return Err(Error::invalid(format!(
                    "time series must be strictly increasing ({t} after {last})"
                )));
            }
        }
        if record.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                context: "time series record vs labels",
                expected: self.labels.len(),
                got: record.len(),
            });
        }
        self.times.push(t);
        self.records.push(record);
        Ok(())
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn records(&self) -> &[Vec<f64>] {
        &self.records
    }

    pub fn meta(&self) -> &[(String, String)] {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Column by label.
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let idx = self.labels.iter().position(|l| l == label)?;
        Some(self.records.iter().map(|r| r[idx]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testsupport::{expm_taylor, random_state};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn identity2() -> OperatorMatrix {
        OperatorMatrix::identity(2)
    }

    fn sigma_z() -> OperatorMatrix {
        OperatorMatrix::hermitian(array![
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-1.0, 0.0)]
        ])
        .unwrap()
    }

    fn sigma_y() -> OperatorMatrix {
        OperatorMatrix::hermitian(array![
            [c(0.0, 0.0), c(0.0, -1.0)],
            [c(0.0, 1.0), c(0.0, 0.0)]
        ])
        .unwrap()
    }

    fn sigma_x() -> OperatorMatrix {
        OperatorMatrix::hermitian(array![
            [c(0.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(0.0, 0.0)]
        ])
        .unwrap()
    }

    #[test]
    fn kron_identities() {
        let id4 = kron(&[&identity2(), &identity2()]).unwrap();
        assert_eq!(id4.dim(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(id4.entries()[(i, j)].re, expect, epsilon = 1e-15);
            }
        }
        // kron(sigma_z, I) = diag(1, 1, -1, -1)
        let zi = kron(&[&sigma_z(), &identity2()]).unwrap();
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (i, e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(zi.entries()[(i, i)].re, *e, epsilon = 1e-15);
        }
    }

    #[test]
    fn kron_sigma_y_pair_elementwise_oracle() {
        // index formula: out[2i+k, 2j+l] = sy[i,j] * sy[k,l]
        let sy = sigma_y();
        let out = kron(&[&sy, &sy]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let expect = sy.entries()[(i, j)] * sy.entries()[(k, l)];
                        let got = out.entries()[(2 * i + k, 2 * j + l)];
                        assert!((got - expect).norm() < 1e-15);
                    }
                }
            }
        }
        assert!(out.is_hermitian());
    }

    proptest! {
        #[test]
        fn kron_associative(seed in 0u64..500) {
            use rand::prelude::*;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut mk = |d: usize| {
                let m = Array2::from_shape_fn((d, d), |_| {
                    c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                });
                OperatorMatrix::general(m).unwrap()
            };
            let a = mk(2);
            let b = mk(3);
            let cc = mk(2);
            let left = kron(&[&kron(&[&a, &b]).unwrap(), &cc]).unwrap();
            let right = kron(&[&a, &kron(&[&b, &cc]).unwrap()]).unwrap();
            for (x, y) in left.entries().iter().zip(right.entries().iter()) {
                prop_assert!((x - y).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn evolve_diagonal_cases() {
        let psi = StateVector::new(vec![2, 2], random_state(4, 3)).unwrap();
        // zero energies -> identity
        let out = evolve_diagonal(&[0.0; 4], &psi, 7.0).unwrap();
        assert!(psi.fidelity(&out).unwrap() > 1.0 - 1e-15);
        // constant shift -> global phase only
        let out = evolve_diagonal(&[2.5; 4], &psi, 1.3).unwrap();
        assert!(psi.fidelity(&out).unwrap() > 1.0 - 1e-15);
        let phase = out.amps()[0] / psi.amps()[0];
        assert!((phase - C64::from_polar(1.0, -2.5 * 1.3)).norm() < 1e-12);
        // length mismatch
        assert!(evolve_diagonal(&[0.0; 3], &psi, 1.0).is_err());
    }

    #[test]
    fn evolve_diagonal_matches_ode() {
        let energies = [0.4, -1.1, 2.2, 0.05];
        let mut h = Array2::zeros((4, 4));
        for (i, e) in energies.iter().enumerate() {
            h[(i, i)] = c(*e, 0.0);
        }
        let hop = OperatorMatrix::hermitian(h).unwrap();
        let psi = StateVector::new(vec![4], random_state(4, 5)).unwrap();
        let exact = evolve_diagonal(&energies, &psi, 3.7).unwrap();
        let ode = evolve_ode(|_| hop.clone(), &psi, 3.7, 1e-10).unwrap();
        for (a, b) in exact.amps().iter().zip(ode.amps().iter()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn ode_zero_hamiltonian() {
        let psi = StateVector::new(vec![2], random_state(2, 1)).unwrap();
        let zero = OperatorMatrix::hermitian(Array2::zeros((2, 2))).unwrap();
        let out = evolve_ode(|_| zero.clone(), &psi, 10.0, 1e-8).unwrap();
        assert!(psi.fidelity(&out).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn ode_eigenstate_phase() {
        // H = sigma_z/2 on |0>: amplitude picks up e^{-i t/2}
        let h = OperatorMatrix::hermitian(sigma_z().entries().mapv(|z| z / 2.0)).unwrap();
        let psi = StateVector::basis_state(vec![2], 0).unwrap();
        let t = 4.2;
        let out = evolve_ode(|_| h.clone(), &psi, t, 1e-10).unwrap();
        assert!((out.amps()[0] - C64::from_polar(1.0, -t / 2.0)).norm() < 1e-8);
        assert!(out.amps()[1].norm() < 1e-10);
    }

    #[test]
    fn ode_matches_expm_oracle() {
        // time-independent H, dim 8: agree with Taylor expm to 10 * tol
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 8;
        let mut h = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            h[(i, i)] = c(rng.random::<f64>() - 0.5, 0.0);
            for j in (i + 1)..n {
                let z = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let hop = OperatorMatrix::hermitian(h.clone()).unwrap();
        let psi = StateVector::new(vec![n], random_state(n, 23)).unwrap();
        let t = 5.0;
        let tol = 1e-9;
        let ode = evolve_ode(|_| hop.clone(), &psi, t, tol).unwrap();
        let u = expm_taylor(&h, c(0.0, -t));
        let exact = psi.with_amps(u.dot(psi.amps()));
        let err: f64 = ode
            .amps()
            .iter()
            .zip(exact.amps().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 10.0 * tol * t, "error {err}");
    }

    #[test]
    fn ode_norm_preserved() {
        let h = OperatorMatrix::hermitian(sigma_x().entries().clone()).unwrap();
        let psi = StateVector::basis_state(vec![2], 0).unwrap();
        let out = evolve_ode(|_| h.clone(), &psi, 50.0, 1e-8).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ode_rejects_non_hermitian_and_mismatch() {
        let bad = OperatorMatrix::general(array![
            [c(0.0, 0.0), c(1.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0)]
        ])
        .unwrap();
        let psi = StateVector::basis_state(vec![2], 0).unwrap();
        assert!(evolve_ode(|_| bad.clone(), &psi, 1.0, 1e-8).is_err());
        let wrong_dim = OperatorMatrix::identity(3);
        assert!(evolve_ode(|_| wrong_dim.clone(), &psi, 1.0, 1e-8).is_err());
    }

    #[test]
    fn partial_trace_product_state() {
        // |0> x |n=3> over 2 x 5, keep the qubit
        let psi = StateVector::basis_state(vec![2, 5], 3).unwrap();
        let rho = partial_trace(&psi, &[0]).unwrap();
        assert_abs_diff_eq!(rho[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert!(rho[(1, 1)].norm() < 1e-12);
        assert!(rho[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let mut amps = Array1::zeros(4);
        amps[0] = c(1.0 / 2f64.sqrt(), 0.0);
        amps[3] = c(1.0 / 2f64.sqrt(), 0.0);
        let bell = StateVector::new(vec![2, 2], amps).unwrap();
        for keep in [[0usize], [1usize]] {
            let rho = partial_trace(&bell, &keep).unwrap();
            assert_abs_diff_eq!(rho[(0, 0)].re, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(rho[(1, 1)].re, 0.5, epsilon = 1e-12);
            assert!(rho[(0, 1)].norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_random_vs_index_loop_oracle() {
        // random 2 x 3 state, keep subsystem 1; hand sum over indices
        let amps = random_state(6, 9);
        let psi = StateVector::new(vec![2, 3], amps.clone()).unwrap();
        let rho = partial_trace(&psi, &[1]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut expect = c(0.0, 0.0);
                for q in 0..2 {
                    expect += amps[q * 3 + i] * amps[q * 3 + j].conj();
                }
                assert!((rho[(i, j)] - expect).norm() < 1e-12);
            }
        }
        // positive semidefinite diagonal, unit trace
        let trace: f64 = (0..3).map(|i| rho[(i, i)].re).sum();
        assert_abs_diff_eq!(trace, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn partial_trace_kron_product_recovers_factor() {
        let a = random_state(2, 31);
        let b = random_state(3, 32);
        let mut amps = Array1::zeros(6);
        for i in 0..2 {
            for j in 0..3 {
                amps[i * 3 + j] = a[i] * b[j];
            }
        }
        let psi = StateVector::new(vec![2, 3], amps).unwrap();
        let rho = partial_trace(&psi, &[0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho[(i, j)] - a[i] * a[j].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_invalid_index() {
        let psi = StateVector::basis_state(vec![2, 2], 0).unwrap();
        assert!(partial_trace(&psi, &[2]).is_err());
        assert!(partial_trace(&psi, &[]).is_err());
    }

    #[test]
    fn expectation_basics() {
        let zero = StateVector::basis_state(vec![2], 0).unwrap();
        assert_abs_diff_eq!(
            expectation_hermitian(&zero, &sigma_z()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let plus = StateVector::new(
            vec![2],
            array![c(1.0 / 2f64.sqrt(), 0.0), c(1.0 / 2f64.sqrt(), 0.0)],
        )
        .unwrap();
        assert_abs_diff_eq!(
            expectation_hermitian(&plus, &sigma_x()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn expectation_jy_squared_vs_dense_oracle() {
        // <psi|Jy^2|psi> for a random 3-qubit state against an explicit
        // dense matrix assembled by index loops
        let n = 3usize;
        let amps = random_state(8, 77);
        let psi = StateVector::new(vec![2; n], amps.clone()).unwrap();
        let sy = sigma_y();
        let mut jy = Array2::<C64>::zeros((8, 8));
        for i in 0..n {
            let mut factor = Array2::<C64>::eye(1);
            for k in 0..n {
                let next = if k == i {
                    sy.entries().mapv(|z| z / 2.0)
                } else {
                    Array2::eye(2)
                };
                factor = kron2(&factor, &next);
            }
            jy = jy + factor;
        }
        let jy2 = jy.dot(&jy);
        let op = OperatorMatrix::hermitian(jy2.clone()).unwrap();
        let got = expectation_hermitian(&psi, &op).unwrap();
        let mut expect = c(0.0, 0.0);
        for i in 0..8 {
            for j in 0..8 {
                expect += amps[i].conj() * jy2[(i, j)] * amps[j];
            }
        }
        assert_abs_diff_eq!(got, expect.re, epsilon = 1e-12);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let psi = StateVector::basis_state(vec![2], 0).unwrap();
        assert!(expectation(&psi, &OperatorMatrix::identity(3)).is_err());
    }

    #[test]
    fn operator_hermitian_validation() {
        let bad = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(0.5, 0.0), c(0.0, 0.0)]];
        assert!(OperatorMatrix::hermitian(bad).is_err());
    }

    #[test]
    fn time_series_contract() {
        let mut ts = TimeSeries::new(vec!["a".into(), "b".into()]);
        ts.push(0.0, vec![1.0, 2.0]).unwrap();
        ts.push(1.0, vec![3.0, 4.0]).unwrap();
        assert!(ts.push(1.0, vec![5.0, 6.0]).is_err());
        assert!(ts.push(2.0, vec![5.0]).is_err());
        assert_eq!(ts.column("b").unwrap(), vec![2.0, 4.0]);
        assert_eq!(ts.len(), 2);
    }

    #[test]
    fn state_vector_validation() {
        assert!(StateVector::new(vec![2], array![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(StateVector::new(vec![1], array![c(1.0, 0.0)]).is_err());
        let ok = StateVector::from_unnormalized(vec![2], array![c(3.0, 0.0), c(4.0, 0.0)])
            .unwrap();
        assert_abs_diff_eq!(ok.norm(), 1.0, epsilon = 1e-12);
    }
}
