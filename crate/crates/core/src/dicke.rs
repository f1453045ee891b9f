//! Symmetric collective-spin representation: Dicke basis states |J,M>,
//! one-axis J_y^2 twisting, GHZ fidelity, and the kicked nonlinear rotor.
//!
//! A symmetric ensemble of N two-level systems carries total spin J = N/2;
//! M counts excitations through N_e = J + M. Amplitudes are stored in
//! ascending M order, so index 0 is |J,-J> (all ground).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{OperatorMatrix, StateVector};
use crate::linalg::{hermitian_eigen, HermitianEigen};

/// Collective angular momentum components and ladders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectiveOp {
    Jx,
    Jy,
    Jz,
    JPlus,
    JMinus,
}

/// State of a spin-J system in the |J,M> basis, M = -J..J ascending.
#[derive(Debug, Clone)]
pub struct DickeState {
    two_j: u32,
    amps: Array1<C64>,
}

impl DickeState {
    pub fn new(two_j: u32, amps: Array1<C64>) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::invalid("need 2J >= 1"));
        }
        if amps.len() != two_j as usize + 1 {
            return Err(Error::DimensionMismatch {
                context: "Dicke amplitudes vs 2J+1",
                expected: two_j as usize + 1,
                got: amps.len(),
            });
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "Dicke state norm {norm} differs from 1 by more than 1e-9"
            )));
        }
        Ok(DickeState { two_j, amps })
    }

    /// All-ground state |J,-J> for an ensemble of `n_qubits` two-level systems.
    pub fn ground(n_qubits: u32) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("need at least one qubit"));
        }
        let dim = n_qubits as usize + 1;
        let mut amps = Array1::zeros(dim);
        amps[0] = C64::new(1.0, 0.0);
        DickeState::new(n_qubits, amps)
    }

    /// Basis state |J,M>, with `m_index` counting from M = -J.
    pub fn basis(two_j: u32, m_index: usize) -> Result<Self> {
        if m_index > two_j as usize {
            return Err(Error::invalid("M index out of range"));
        }
        let mut amps = Array1::zeros(two_j as usize + 1);
        amps[m_index] = C64::new(1.0, 0.0);
        DickeState::new(two_j, amps)
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Number of qubits represented (N = 2J).
    pub fn n_qubits(&self) -> u32 {
        self.two_j
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    pub fn amps(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn fidelity(&self, other: &DickeState) -> Result<f64> {
        if self.two_j != other.two_j {
            return Err(Error::DimensionMismatch {
                context: "Dicke fidelity",
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr())
    }

    fn with_amps(&self, amps: Array1<C64>) -> DickeState {
        DickeState {
            two_j: self.two_j,
            amps,
        }
    }
}

/// Angular-momentum operator in the |J,M> basis (2J given as an integer so
/// half-integer J is exact).
pub fn collective_op(two_j: u32, which: CollectiveOp) -> OperatorMatrix {
    let dim = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let m_of = |k: usize| -j + k as f64;
    let mut jp = Array2::<C64>::zeros((dim, dim));
    for k in 0..dim - 1 {
        let m = m_of(k);
        jp[(k + 1, k)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.t().mapv(|z| z.conj());
    let entries = match which {
        CollectiveOp::JPlus => jp,
        CollectiveOp::JMinus => jm,
        CollectiveOp::Jx => (&jp + &jm).mapv(|z| z / 2.0),
        CollectiveOp::Jy => (&jp - &jm).mapv(|z| z / C64::new(0.0, 2.0)),
        CollectiveOp::Jz => {
            let mut d = Array2::<C64>::zeros((dim, dim));
            for k in 0..dim {
                d[(k, k)] = C64::new(m_of(k), 0.0);
            }
            d
        }
    };
    match which {
        CollectiveOp::JPlus | CollectiveOp::JMinus => {
            OperatorMatrix::general(entries).expect("square by construction")
        }
        _ => OperatorMatrix::hermitian(entries).expect("hermitian by construction"),
    }
}

static EIGEN_CACHE: OnceLock<Mutex<HashMap<(u32, u8), Arc<HermitianEigen>>>> = OnceLock::new();

fn cached_eigen(two_j: u32, which: CollectiveOp) -> Arc<HermitianEigen> {
    let tag = match which {
        CollectiveOp::Jx => 0u8,
        CollectiveOp::Jy => 1u8,
        _ => unreachable!("only Jx/Jy eigendecompositions are cached"),
    };
    let cache = EIGEN_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("eigen cache poisoned");
    guard
        .entry((two_j, tag))
        .or_insert_with(|| Arc::new(hermitian_eigen(collective_op(two_j, which).entries())))
        .clone()
}

/// One-axis twisting `exp(-i A J_y^2)`.
pub fn one_axis_twist(state: &DickeState, twist: f64) -> DickeState {
    let eigen = cached_eigen(state.two_j, CollectiveOp::Jy);
    let amps = eigen.apply_map(
        |lam| C64::from_polar(1.0, -twist * lam * lam),
        state.amps(),
    );
    state.with_amps(renormalized(amps))
}

/// Scrub the sub-1e-14 norm noise the eigenbasis round trip leaves behind,
/// so long stroboscopic runs stay normalized.
fn renormalized(mut amps: Array1<C64>) -> Array1<C64> {
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        amps.mapv_inplace(|z| z / norm);
    }
    amps
}

/// Best overlap with a GHZ-form state `(e^{i phi_g}|J,-J> + e^{i phi_e}|J,+J>)/sqrt(2)`,
/// maximized over the two phases in closed form.
///
/// Returns `(fidelity, phi_g, phi_e)`; a zero extreme amplitude leaves its
/// phase at 0.
pub fn ghz_fidelity(state: &DickeState) -> (f64, f64, f64) {
    let a_g = state.amps()[0];
    let a_e = state.amps()[state.dim() - 1];
    let fidelity = (a_g.norm() + a_e.norm()).powi(2) / 2.0;
    let phi_g = if a_g.norm() > 0.0 { a_g.arg() } else { 0.0 };
    let phi_e = if a_e.norm() > 0.0 { a_e.arg() } else { 0.0 };
    (fidelity, phi_g, phi_e)
}

/// One step of the kicked nonlinear rotor:
/// `exp(-i kick J_y^2 / (2J+1)) exp(-i rotation J_x)`, rotation first.
///
/// The 1/(2J+1) normalization of the kick term follows the usual kicked-top
/// convention so the kick strength has a classical limit.
pub fn kicked_rotor_step(state: &DickeState, kick: f64, rotation: f64) -> DickeState {
    let jx = cached_eigen(state.two_j, CollectiveOp::Jx);
    let rotated = jx.apply_map(|lam| C64::from_polar(1.0, -rotation * lam), state.amps());
    let jy = cached_eigen(state.two_j, CollectiveOp::Jy);
    let scale = kick / (state.two_j as f64 + 1.0);
    let kicked = jy.apply_map(|lam| C64::from_polar(1.0, -scale * lam * lam), &rotated);
    state.with_amps(renormalized(kicked))
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Largest qubit count accepted by [`symmetric_embed`] (2^N amplitudes).
pub const MAX_EMBED_QUBITS: u32 = 20;

/// Expand |J,M> into the symmetric N-qubit state: the normalized sum of all
/// product states with J+M excited qubits.
pub fn symmetric_embed(state: &DickeState) -> Result<StateVector> {
    let n = state.n_qubits();
    if n > MAX_EMBED_QUBITS {
        return Err(Error::invalid(format!(
            "symmetric_embed limited to {MAX_EMBED_QUBITS} qubits, got {n}"
        )));
    }
    let nq = n as usize;
    let mut amps = Array1::zeros(1usize << nq);
    for (k, a) in state.amps().iter().enumerate() {
        if a.norm() == 0.0 {
            continue;
        }
        let weight = *a / C64::new(binomial(n, k as u32).sqrt(), 0.0);
        for b in 0..(1usize << nq) {
            if b.count_ones() as usize == k {
                amps[b] = weight;
            }
        }
    }
    StateVector::new(vec![2; nq], amps)
}

/// Project an N-qubit state onto the symmetric (Dicke) subspace.
///
/// Returns the renormalized projection together with the squared norm lost
/// outside the subspace (zero for symmetric inputs). A state with no
/// symmetric component is an error.
pub fn symmetric_project(psi: &StateVector) -> Result<(DickeState, f64)> {
    let nq = psi.dims().len();
    if psi.dims().iter().any(|&d| d != 2) {
        return Err(Error::invalid("symmetric_project needs a qubit register"));
    }
    let n = nq as u32;
    let mut amps = Array1::<C64>::zeros(nq + 1);
    for (b, a) in psi.amps().iter().enumerate() {
        amps[b.count_ones() as usize] += *a;
    }
    for (k, a) in amps.iter_mut().enumerate() {
        *a /= C64::new(binomial(n, k as u32).sqrt(), 0.0);
    }
    let sym_norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let lost = (1.0 - sym_norm_sq).max(0.0);
    if sym_norm_sq < 1e-12 {
        return Err(Error::NoSymmetricComponent { lost_norm: lost });
    }
    let scale = sym_norm_sq.sqrt();
    let state = DickeState::new(n, amps.mapv(|z| z / scale))?;
    Ok((state, lost))
}
