//! Bichromatic gate on trapped ions sharing one vibrational mode.
//!
//! Two engines propagate the same interaction-picture model of ions driven
//! by a two-tone field detuned near the trap frequency:
//!
//! * a full numerical integration of the time-dependent Hamiltonian
//!   `H(t) = -sqrt(2) eta Omega J_y [x cos((nu-delta)t) + p sin((nu-delta)t)]`
//!   on the truncated (qubits tensor Fock) space, and
//! * the closed-form propagator
//!   `U(t) = exp(-iA J_y^2) exp(-iF J_y x) exp(-iG J_y p)`
//!   with phases F, G, A evaluated analytically.
//!
//! The two must agree to integrator tolerance whenever the Fock truncation is
//! generous enough; the tests and the acceptance suite lean on that.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    self, kron2, partial_trace, OperatorMatrix, StateVector, TimeSeries,
};
use crate::linalg::{hermitian_eigen, trace_distance, HermitianEigen};
use crate::spin;

/// Per-unit-time ODE tolerance used by the full engine.
pub const FULL_ENGINE_TOL: f64 = 1e-10;

/// Fock levels kept free above the largest initial occupation in
/// [`vibrational_independence_report`].
pub const TRUNCATION_MARGIN: usize = 10;

/// Trap and drive parameters. `nu` sets the time unit; the two drive tones
/// sit at `omega_eg +/- delta` so only `nu - delta` enters the dynamics.
#[derive(Debug, Clone, Copy)]
pub struct IonTrapParams {
    /// Trap frequency.
    pub nu: f64,
    /// Detuning of the two tones from the carrier; resonance `delta = nu`
    /// is excluded.
    pub delta: f64,
    /// Lamb-Dicke parameter.
    pub eta: f64,
    /// Rabi frequency, same unit as `nu`.
    pub omega: f64,
    /// Ions illuminated (all of them, collectively).
    pub n_ions: usize,
    /// Fock-space truncation of the vibrational mode.
    pub n_max: usize,
}

impl IonTrapParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::invalid("trap frequency nu must be positive"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::invalid("detuning delta must be positive"));
        }
        if self.delta == self.nu {
            return Err(Error::Resonance { nu: self.nu });
        }
        if !(self.eta > 0.0) {
            return Err(Error::invalid("Lamb-Dicke eta must be positive"));
        }
        if self.n_ions < 1 || self.n_ions > 10 {
            return Err(Error::invalid("n_ions must be in 1..=10"));
        }
        if self.n_max < 1 {
            return Err(Error::invalid("n_max must be >= 1"));
        }
        Ok(())
    }

    /// Gap `nu - delta` driving the gate phases.
    pub fn gap(&self) -> f64 {
        self.nu - self.delta
    }

    pub fn qubit_dim(&self) -> usize {
        1usize << self.n_ions
    }

    pub fn dim(&self) -> usize {
        self.qubit_dim() * self.n_max
    }

    /// Subsystem dimensions: one qubit per ion, the mode last.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![2usize; self.n_ions];
        dims.push(self.n_max);
        dims
    }

    /// `|g...g> tensor |n>` on this space.
    pub fn ground_with_fock(&self, n: usize) -> Result<StateVector> {
        if n >= self.n_max {
            return Err(Error::invalid("Fock index beyond truncation"));
        }
        StateVector::basis_state(self.dims(), n)
    }

    /// Collective `J_y = (1/2) sum_i sigma_{y,i}` on the qubit register.
    pub fn jy_qubit(&self) -> Array2<C64> {
        collective_qubit_op(&spin::jy(), self.n_ions)
    }
}

/// `sum_i op_i` over `n` qubits (dense).
pub(crate) fn collective_qubit_op(op: &Array2<C64>, n: usize) -> Array2<C64> {
    let dim = 1usize << n;
    let mut total = Array2::<C64>::zeros((dim, dim));
    for i in 0..n {
        let mut factor = Array2::<C64>::eye(1);
        for k in 0..n {
            let next = if k == i {
                op.clone()
            } else {
                Array2::<C64>::eye(2)
            };
            factor = kron2(&factor, &next);
        }
        total = total + factor;
    }
    total
}

/// Dimensionless gate phases accumulated by time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BichromaticCoefficients {
    /// Coefficient of `J_y x` in the propagator ansatz.
    pub f: f64,
    /// Coefficient of `J_y p`.
    pub g: f64,
    /// Coefficient of `J_y^2` (the gate phase).
    pub a: f64,
}

/// Closed forms for F, G, A.
///
/// With `mu = nu - delta` and `K = sqrt(2) eta Omega`:
/// `F = -K sin(mu t)/mu`, `G = -K (1 - cos(mu t))/mu`, and integrating
/// `A' = K F sin(mu t)` gives
/// `A = -(eta Omega)^2 t / mu + (eta Omega)^2 sin(2 mu t) / (2 mu^2)`.
/// The quadrature cross-check lives in the tests.
pub fn coefficients(p: &IonTrapParams, t: f64) -> Result<BichromaticCoefficients> {
    p.validate()?;
    let mu = p.gap();
    let k = 2f64.sqrt() * p.eta * p.omega;
    let eo = p.eta * p.omega;
    Ok(BichromaticCoefficients {
        f: -k * (mu * t).sin() / mu,
        g: -k * (1.0 - (mu * t).cos()) / mu,
        a: -eo * eo * t / mu + eo * eo * (2.0 * mu * t).sin() / (2.0 * mu * mu),
    })
}

/// Secular (weak-field) approximation of the gate phase,
/// `A(t) ~ -(Omega eta)^2 t / (nu - delta)`.
pub fn slow_gate_phase(p: &IonTrapParams, t: f64) -> f64 {
    let eo = p.eta * p.omega;
    -eo * eo * t / p.gap()
}

/// Amplitude of the oscillatory term dropped by [`slow_gate_phase`].
pub fn slow_gate_ripple(p: &IonTrapParams) -> f64 {
    let eo = p.eta * p.omega;
    eo * eo / (2.0 * p.gap() * p.gap())
}

/// k-th time at which F and G vanish simultaneously, `tau = 2 pi k / |nu - delta|`.
pub fn fast_gate_time(p: &IonTrapParams, k: u32) -> Result<f64> {
    p.validate()?;
    Ok(2.0 * PI * k as f64 / p.gap().abs())
}

/// Interaction-picture Hamiltonian at time `t` on the truncated space.
pub fn hamiltonian_at(p: &IonTrapParams, t: f64) -> Result<OperatorMatrix> {
    p.validate()?;
    Ok(FullHamiltonian::new(p)?.at(t))
}

/// Prebuilt constant parts of the time-dependent Hamiltonian, for repeated
/// evaluation inside the integrator.
pub struct FullHamiltonian {
    hx: OperatorMatrix,
    hp: OperatorMatrix,
    mu: f64,
}

impl FullHamiltonian {
    pub fn new(p: &IonTrapParams) -> Result<Self> {
        p.validate()?;
        let coupling = -(2f64.sqrt()) * p.eta * p.omega;
        let jy = p.jy_qubit();
        let jy_x = kron2(&jy, &hilbert::position(p.n_max)).mapv(|z| z * coupling);
        let jy_p = kron2(&jy, &hilbert::momentum(p.n_max)).mapv(|z| z * coupling);
        Ok(FullHamiltonian {
            hx: OperatorMatrix::hermitian(jy_x)?,
            hp: OperatorMatrix::hermitian(jy_p)?,
            mu: p.gap(),
        })
    }

    pub fn at(&self, t: f64) -> OperatorMatrix {
        OperatorMatrix::hermitian_combination(&[
            ((self.mu * t).cos(), &self.hx),
            ((self.mu * t).sin(), &self.hp),
        ])
        .expect("terms are hermitian with matching dims")
    }
}

/// Closed-form propagator with cached eigenstructure.
///
/// `J_y tensor p` is unitarily related to `J_y tensor x` by the Fock-phase
/// map `S = diag(i^n)` (`p = S x S^dag` holds exactly on the truncated
/// space), so one tridiagonal eigendecomposition of `x` serves both factors.
pub struct EffectivePropagator {
    params: IonTrapParams,
    qubit_eigen: HermitianEigen,
    mode_eigen: HermitianEigen,
    fock_phases: Array1<C64>,
}

impl EffectivePropagator {
    pub fn new(p: &IonTrapParams) -> Result<Self> {
        p.validate()?;
        let qubit_eigen = hermitian_eigen(&p.jy_qubit());
        let mode_eigen = hermitian_eigen(&hilbert::position(p.n_max));
        let fock_phases = Array1::from_iter(
            (0..p.n_max).map(|n| C64::new(0.0, 1.0).powu(n as u32)),
        );
        Ok(EffectivePropagator {
            params: *p,
            qubit_eigen,
            mode_eigen,
            fock_phases,
        })
    }

    pub fn params(&self) -> &IonTrapParams {
        &self.params
    }

    pub fn coefficients(&self, t: f64) -> BichromaticCoefficients {
        coefficients(&self.params, t).expect("params validated at construction")
    }

    /// Apply `U(t)` to a state without forming the dense matrix.
    pub fn apply(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.params.dim() {
            return Err(Error::DimensionMismatch {
                context: "effective propagator vs state",
                expected: self.params.dim(),
                got: psi.dim(),
            });
        }
        let co = self.coefficients(t);
        let qd = self.params.qubit_dim();
        let nm = self.params.n_max;

        let mut amps = psi.amps().clone();
        // exp(-i G Jy p): conjugate the Jy x factor by S = diag(i^n)
        self.mode_phase(&mut amps, true);
        self.jy_x_factor(&mut amps, co.g, qd, nm);
        self.mode_phase(&mut amps, false);
        // exp(-i F Jy x)
        self.jy_x_factor(&mut amps, co.f, qd, nm);
        // exp(-i A Jy^2) on the qubit register alone
        let mat = self.reshape(&amps, qd, nm);
        let twisted = self
            .qubit_eigen
            .map(|m| C64::from_polar(1.0, -co.a * m * m))
            .dot(&mat);
        Ok(psi.with_amps(flatten(&twisted)))
    }

    /// Dense `U(t)`; exactly unitary on the truncated space.
    pub fn matrix(&self, t: f64) -> OperatorMatrix {
        let co = self.coefficients(t);
        let qd = self.params.qubit_dim();
        let nm = self.params.n_max;
        let dim = qd * nm;

        // exp(-i c Jy x) = (Vq kron Vx) diag(e^{-i c m lambda}) (Vq kron Vx)^dag
        let jy_x_exp = |c: f64| -> Array2<C64> {
            let w = kron2(&self.qubit_eigen.vectors, &self.mode_eigen.vectors);
            let mut d = Array1::<C64>::zeros(dim);
            for (qi, m) in self.qubit_eigen.values.iter().enumerate() {
                for (ni, lam) in self.mode_eigen.values.iter().enumerate() {
                    d[qi * nm + ni] = C64::from_polar(1.0, -c * m * lam);
                }
            }
            let mut scaled = w.clone();
            for j in 0..dim {
                for i in 0..dim {
                    scaled[(i, j)] *= d[j];
                }
            }
            let wdag = w.t().mapv(|z| z.conj());
            scaled.dot(&wdag)
        };

        let e_f = jy_x_exp(co.f);
        let mut e_g = jy_x_exp(co.g);
        // conjugate by I kron S
        for i in 0..dim {
            for j in 0..dim {
                e_g[(i, j)] = self.fock_phases[i % nm]
                    * e_g[(i, j)]
                    * self.fock_phases[j % nm].conj();
            }
        }
        let twist = self
            .qubit_eigen
            .map(|m| C64::from_polar(1.0, -co.a * m * m));
        let e_a = kron2(&twist, &Array2::eye(nm));
        let u = e_a.dot(&e_f).dot(&e_g);
        OperatorMatrix::general(u).expect("square by construction")
    }

    fn reshape(&self, amps: &Array1<C64>, qd: usize, nm: usize) -> Array2<C64> {
        Array2::from_shape_fn((qd, nm), |(q, n)| amps[q * nm + n])
    }

    fn mode_phase(&self, amps: &mut Array1<C64>, adjoint: bool) {
        let nm = self.params.n_max;
        for (idx, a) in amps.iter_mut().enumerate() {
            let s = self.fock_phases[idx % nm];
            *a *= if adjoint { s.conj() } else { s };
        }
    }

    /// In place `exp(-i c Jy tensor x)` via the cached eigenbases.
    fn jy_x_factor(&self, amps: &mut Array1<C64>, c: f64, qd: usize, nm: usize) {
        let m = self.reshape(amps, qd, nm);
        // coords = Vq^dag M conj(Vx)
        let vq_dag = self.qubit_eigen.vectors.t().mapv(|z| z.conj());
        let vx_conj = self.mode_eigen.vectors.mapv(|z| z.conj());
        let mut coords = vq_dag.dot(&m).dot(&vx_conj);
        for (qi, mval) in self.qubit_eigen.values.iter().enumerate() {
            for (ni, lam) in self.mode_eigen.values.iter().enumerate() {
                coords[(qi, ni)] *= C64::from_polar(1.0, -c * mval * lam);
            }
        }
        let vx_t = self.mode_eigen.vectors.t();
        let back = self.qubit_eigen.vectors.dot(&coords).dot(&vx_t);
        *amps = flatten(&back);
    }
}

fn flatten(m: &Array2<C64>) -> Array1<C64> {
    Array1::from_iter(m.iter().copied())
}

/// Dense closed-form propagator `U(t)`.
pub fn effective_propagator(p: &IonTrapParams, t: f64) -> Result<OperatorMatrix> {
    Ok(EffectivePropagator::new(p)?.matrix(t))
}

/// Which engine drives a trace or report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Adaptive integration of the time-dependent Hamiltonian.
    Full,
    /// Closed-form propagator.
    Effective,
}

impl Engine {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Engine::Full),
            "effective" => Ok(Engine::Effective),
            other => Err(Error::invalid(format!(
                "unknown engine '{other}' (expected full|effective)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::Full => "full",
            Engine::Effective => "effective",
        }
    }
}

/// Internal-state density matrix elements along a time grid.
///
/// Labels: `rho_gg_gg`, `rho_ee_ee`, `re_rho_gg_ee`, `im_rho_gg_ee`, where
/// `gg` and `ee` are the all-ground and all-excited product states of the
/// illuminated ions; the vibrational mode is traced out at each grid point.
pub fn gate_trace(
    p: &IonTrapParams,
    psi0: &StateVector,
    t_grid: &[f64],
    engine: Engine,
) -> Result<TimeSeries> {
    p.validate()?;
    if psi0.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "gate_trace initial state",
            expected: p.dim(),
            got: psi0.dim(),
        });
    }
    if t_grid.is_empty() {
        return Err(Error::invalid("empty time grid"));
    }
    if t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "time grid must be non-negative and strictly increasing",
        ));
    }

    let mut series = TimeSeries::new(
        ["rho_gg_gg", "rho_ee_ee", "re_rho_gg_ee", "im_rho_gg_ee"]
            .into_iter()
            .map(String::from)
            .collect(),
    );
    series.set_meta("engine", engine.as_str());

    let keep: Vec<usize> = (0..p.n_ions).collect();
    let gg = 0usize;
    let ee = p.qubit_dim() - 1;
    let record = |series: &mut TimeSeries, t: f64, psi: &StateVector| -> Result<()> {
        let rho = partial_trace(psi, &keep)?;
        series.push(
            t,
            vec![
                rho[(gg, gg)].re,
                rho[(ee, ee)].re,
                rho[(gg, ee)].re,
                rho[(gg, ee)].im,
            ],
        )
    };

    match engine {
        Engine::Effective => {
            let prop = EffectivePropagator::new(p)?;
            for &t in t_grid {
                let psi = if t == 0.0 {
                    psi0.clone()
                } else {
                    prop.apply(t, psi0)?
                };
                record(&mut series, t, &psi)?;
            }
        }
        Engine::Full => {
            let h = FullHamiltonian::new(p)?;
            let mut psi = psi0.clone();
            let mut t_prev = 0.0;
            for &t in t_grid {
                if t > t_prev {
                    psi = hilbert::evolve_ode_span(
                        |tt| h.at(tt),
                        &psi,
                        t_prev,
                        t,
                        FULL_ENGINE_TOL,
                    )?;
                    t_prev = t;
                }
                record(&mut series, t, &psi)?;
            }
        }
    }
    Ok(series)
}

/// Evolve to time `t` from `|g...g> tensor |n>` with the chosen engine.
pub fn evolve_from_fock(
    p: &IonTrapParams,
    n: usize,
    t: f64,
    engine: Engine,
) -> Result<StateVector> {
    let psi0 = p.ground_with_fock(n)?;
    match engine {
        Engine::Effective => EffectivePropagator::new(p)?.apply(t, &psi0),
        Engine::Full => {
            let h = FullHamiltonian::new(p)?;
            hilbert::evolve_ode(|tt| h.at(tt), &psi0, t, FULL_ENGINE_TOL)
        }
    }
}

/// Largest pairwise trace distance between the internal reduced states
/// reached from initial Fock levels `n_list` after time `tau`.
///
/// At a fast-gate time the distance vanishes up to truncation and integrator
/// error; elsewhere internal and motional states entangle and it does not.
pub fn vibrational_independence_report(
    p: &IonTrapParams,
    n_list: &[usize],
    tau: f64,
    engine: Engine,
) -> Result<f64> {
    p.validate()?;
    if n_list.is_empty() {
        return Err(Error::invalid("empty Fock index list"));
    }
    let max_n = *n_list.iter().max().expect("non-empty");
    if max_n + TRUNCATION_MARGIN >= p.n_max {
        return Err(Error::TruncationMargin {
            needed: max_n + TRUNCATION_MARGIN + 1,
            n_max: p.n_max,
        });
    }
    let keep: Vec<usize> = (0..p.n_ions).collect();
    let mut reduced = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let psi = evolve_from_fock(p, n, tau, engine)?;
        reduced.push(partial_trace(&psi, &keep)?);
    }
    let mut worst = 0.0f64;
    for i in 0..reduced.len() {
        for j in (i + 1)..reduced.len() {
            worst = worst.max(trace_distance(&reduced[i], &reduced[j]));
        }
    }
    Ok(worst)
}
