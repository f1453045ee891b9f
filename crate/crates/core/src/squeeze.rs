//! Spin-squeezing analysis on lattice registers: collective means and
//! variances, the squeezing parameter `xi^2 = N (Delta J_theta)^2 / <J_z>^2`,
//! optimization over time and quadrature angle, neighbor-visit coupling
//! maps, and Monte Carlo over lattice filling.
//!
//! The transverse variance is handled through its exact harmonic form
//! `Var(J_theta) = A + B cos(2 theta) + C sin(2 theta)` with
//! `A = (Var Jx + Var Jy)/2`, `B = (Var Jx - Var Jy)/2` and `C` the
//! symmetrized covariance; one pass over the state then serves every angle.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{evolve_diagonal, StateVector, TimeSeries};
use crate::lattice::{
    global_pulse, sample_occupations_with, x_basis_energies, Boundary, LatticeConfig,
};
use crate::spin::Axis;

/// Threshold below which `<J_z>^2 / N^2` renders `xi^2` undefined.
pub const MEAN_SPIN_FLOOR: f64 = 1e-12;

/// Symmetric pairwise coupling strengths `chi_{k,l}` between lattice sites,
/// zero on the diagonal. Units of energy (`hbar = 1`); the Hamiltonian sums
/// ordered pairs, so an unordered pair contributes twice its entry.
#[derive(Debug, Clone)]
pub struct CouplingMap {
    n_sites: usize,
    entries: Array2<f64>,
}

impl CouplingMap {
    pub fn new(n_sites: usize, entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() != n_sites || entries.ncols() != n_sites {
            return Err(Error::DimensionMismatch {
                context: "coupling map entries",
                expected: n_sites,
                got: entries.nrows().max(entries.ncols()),
            });
        }
        let map = CouplingMap { n_sites, entries };
        map.check_symmetric()?;
        Ok(map)
    }

    pub fn zeros(n_sites: usize) -> Self {
        CouplingMap {
            n_sites,
            entries: Array2::zeros((n_sites, n_sites)),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.entries[(k, l)]
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Rescale every coupling by `chi`.
    pub fn scaled(&self, chi: f64) -> CouplingMap {
        CouplingMap {
            n_sites: self.n_sites,
            entries: self.entries.mapv(|x| x * chi),
        }
    }

    pub fn check_symmetric(&self) -> Result<()> {
        let mut asym = 0.0f64;
        for k in 0..self.n_sites {
            if self.entries[(k, k)] != 0.0 {
                return Err(Error::invalid("coupling map diagonal must be zero"));
            }
            for l in (k + 1)..self.n_sites {
                asym = asym.max((self.entries[(k, l)] - self.entries[(l, k)]).abs());
            }
        }
        if asym > 1e-15 {
            return Err(Error::AsymmetricCoupling { asymmetry: asym });
        }
        Ok(())
    }

    /// Count of coupled unordered pairs (nonzero entries above the diagonal).
    pub fn coupled_pairs(&self) -> usize {
        let mut count = 0;
        for k in 0..self.n_sites {
            for l in (k + 1)..self.n_sites {
                if self.entries[(k, l)] != 0.0 {
                    count += 1;
                }
            }
        }
        count
    }
}

/// Unit-strength couplings between occupied sites within `n_neighbors`
/// lattice spacings (two-sided visits; ring distance when periodic).
pub fn neighbor_coupling_map(
    cfg: &LatticeConfig,
    n_neighbors: usize,
    boundary: Boundary,
) -> Result<CouplingMap> {
    cfg.validate()?;
    if n_neighbors == 0 {
        return Err(Error::invalid("n_neighbors must be >= 1"));
    }
    if n_neighbors > cfg.n_sites.saturating_sub(1) {
        return Err(Error::invalid(format!(
            "n_neighbors = {} exceeds the lattice extent ({} sites)",
            n_neighbors, cfg.n_sites
        )));
    }
    let n = cfg.n_sites;
    let mut entries = Array2::zeros((n, n));
    for k in 0..n {
        if !cfg.occupations[k] {
            continue;
        }
        for l in (k + 1)..n {
            if !cfg.occupations[l] {
                continue;
            }
            let d = l - k;
            let dist = match boundary {
                Boundary::Open => d,
                Boundary::Periodic => d.min(n - d),
            };
            if dist <= n_neighbors {
                entries[(k, l)] = 1.0;
                entries[(l, k)] = 1.0;
            }
        }
    }
    CouplingMap::new(n, entries)
}

/// Exact evolution of the all-down coherent spin state under the
/// x-diagonal coupling Hamiltonian for time `t`.
pub fn ising_x_evolve(cfg: &LatticeConfig, map: &CouplingMap, t: f64) -> Result<StateVector> {
    IsingEvolver::new(cfg, map)?.state_at(t)
}

/// Cached pieces of the exact x-basis evolution: diagonal energies and the
/// all-down state already rotated into the x product basis.
pub struct IsingEvolver {
    n_atoms: usize,
    energies: Vec<f64>,
    x_amps: StateVector,
}

impl IsingEvolver {
    pub fn new(cfg: &LatticeConfig, map: &CouplingMap) -> Result<Self> {
        cfg.validate()?;
        map.check_symmetric()?;
        if map.n_sites() != cfg.n_sites {
            return Err(Error::DimensionMismatch {
                context: "coupling map vs lattice",
                expected: cfg.n_sites,
                got: map.n_sites(),
            });
        }
        let energies = x_basis_energies(cfg, map);
        let down = cfg.all_down_state()?;
        let x_amps = global_pulse(&down, Axis::Y, -std::f64::consts::FRAC_PI_2)?;
        Ok(IsingEvolver {
            n_atoms: cfg.n_atoms(),
            energies,
            x_amps,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// State at time `t` back in the z product basis.
    ///
    /// `t = 0` returns the coherent all-down state without the basis
    /// round-trip, keeping the t = 0 moments exact in floating point.
    pub fn state_at(&self, t: f64) -> Result<StateVector> {
        if t == 0.0 {
            return StateVector::basis_state(vec![2; self.n_atoms], 0);
        }
        let evolved = evolve_diagonal(&self.energies, &self.x_amps, t)?;
        global_pulse(&evolved, Axis::Y, std::f64::consts::FRAC_PI_2)
    }

    /// Collective moments at time `t`, evaluated directly in the x product
    /// basis (no back-rotation). The frame map `F j_z F^dag = -j_x`,
    /// `F j_x F^dag = j_z`, `F j_y F^dag = j_y` turns the z-frame moments
    /// into frame quantities with `J_z` diagonal, which keeps the inner
    /// optimization loops cheap.
    pub fn moments_at(&self, t: f64) -> Result<CollectiveMoments> {
        if t == 0.0 {
            let n = self.n_atoms as f64;
            return Ok(CollectiveMoments {
                jx: 0.0,
                jy: 0.0,
                jz: -n / 2.0,
                var_jx: n / 4.0,
                var_jy: n / 4.0,
                cov_sym: 0.0,
            });
        }
        let psi_x = evolve_diagonal(&self.energies, &self.x_amps, t)?;
        let n_atoms = self.n_atoms;
        let amps = psi_x.amps();
        let dim = amps.len();
        let half_n = n_atoms as f64 / 2.0;

        // frame Jz is diagonal: first and second moments in one pass
        let mut mzf = 0.0f64;
        let mut mzf2 = 0.0f64;
        for (b, a) in amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w != 0.0 {
                let m = b.count_ones() as f64 - half_n;
                mzf += w * m;
                mzf2 += w * m * m;
            }
        }
        // frame Jx: first moment only, accumulated without allocation
        let mut mxf = 0.0f64;
        for atom in 0..n_atoms {
            let mask = 1usize << (n_atoms - 1 - atom);
            for b in 0..dim {
                mxf += 0.5 * (amps[b].conj() * amps[b ^ mask]).re;
            }
        }
        // frame Jy: full application for the second moment
        let vy = apply_jy(&psi_x);
        let myf: f64 = amps
            .iter()
            .zip(vy.iter())
            .map(|(a, v)| (a.conj() * v).re)
            .sum();
        let myf2: f64 = vy.iter().map(|v| v.norm_sqr()).sum();
        // <{Jz_f, Jy_f}>/2 with the diagonal factor inline
        let mut anti_zy = 0.0f64;
        for (b, (a, v)) in amps.iter().zip(vy.iter()).enumerate() {
            let m = b.count_ones() as f64 - half_n;
            anti_zy += m * (a.conj() * v).re;
        }

        Ok(CollectiveMoments {
            jx: mzf,
            jy: myf,
            jz: -mxf,
            var_jx: mzf2 - mzf * mzf,
            var_jy: myf2 - myf * myf,
            cov_sym: anti_zy - mzf * myf,
        })
    }
}

/// First and second collective-spin moments of a qubit-register state.
#[derive(Debug, Clone, Copy)]
pub struct CollectiveMoments {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub var_jx: f64,
    pub var_jy: f64,
    /// `<{Jx, Jy}>/2 - <Jx><Jy>`.
    pub cov_sym: f64,
}

impl CollectiveMoments {
    /// `Var(J_theta)` for `J_theta = cos(theta) Jx + sin(theta) Jy`.
    pub fn variance_theta(&self, theta: f64) -> f64 {
        let a = (self.var_jx + self.var_jy) / 2.0;
        let b = (self.var_jx - self.var_jy) / 2.0;
        let c = self.cov_sym;
        a + b * (2.0 * theta).cos() + c * (2.0 * theta).sin()
    }

    /// Angle minimizing the transverse variance, wrapped to [-pi/2, pi/2).
    pub fn theta_min(&self) -> f64 {
        let b = (self.var_jx - self.var_jy) / 2.0;
        let c = self.cov_sym;
        if b == 0.0 && c == 0.0 {
            // flat variance: -pi/4 as the tie-break
            return -std::f64::consts::FRAC_PI_4;
        }
        let theta = (c.atan2(b) + std::f64::consts::PI) / 2.0;
        wrap_half_pi(theta)
    }

    pub fn mean_spin(&self) -> [f64; 3] {
        [self.jx, self.jy, self.jz]
    }
}

fn wrap_half_pi(theta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut t = (theta + pi / 2.0).rem_euclid(pi) - pi / 2.0;
    if t >= pi / 2.0 {
        t -= pi;
    }
    t
}

fn bit_of(index: usize, atom: usize, n_atoms: usize) -> usize {
    (index >> (n_atoms - 1 - atom)) & 1
}

/// `Jx |psi>` on the register, matrix-free.
fn apply_jx(psi: &StateVector) -> Array1<C64> {
    let n_atoms = psi.dims().len();
    let amps = psi.amps();
    let mut out = Array1::zeros(amps.len());
    for atom in 0..n_atoms {
        let mask = 1usize << (n_atoms - 1 - atom);
        for b in 0..amps.len() {
            out[b] += amps[b ^ mask] * 0.5;
        }
    }
    out
}

/// `Jy |psi>` on the register, matrix-free.
fn apply_jy(psi: &StateVector) -> Array1<C64> {
    let n_atoms = psi.dims().len();
    let amps = psi.amps();
    let mut out = Array1::zeros(amps.len());
    for atom in 0..n_atoms {
        let mask = 1usize << (n_atoms - 1 - atom);
        for b in 0..amps.len() {
            // <b | jy | b^mask>: +i/2 into bit 0, -i/2 into bit 1
            let coeff = if bit_of(b, atom, n_atoms) == 1 {
                C64::new(0.0, -0.5)
            } else {
                C64::new(0.0, 0.5)
            };
            out[b] += amps[b ^ mask] * coeff;
        }
    }
    out
}

/// Collective `(<Jx>, <Jy>, <Jz>)` over the occupied-site register.
pub fn mean_spin(psi: &StateVector) -> Result<[f64; 3]> {
    Ok(collective_moments(psi)?.mean_spin())
}

/// One pass over the state for all first and second transverse moments.
pub fn collective_moments(psi: &StateVector) -> Result<CollectiveMoments> {
    if psi.dims().iter().any(|&d| d != 2) {
        return Err(Error::invalid("collective moments need a qubit register"));
    }
    let n_atoms = psi.dims().len();
    let amps = psi.amps();
    let vx = apply_jx(psi);
    let vy = apply_jy(psi);
    let dot_re = |a: &Array1<C64>, b: &Array1<C64>| -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
    };
    let jx = dot_re(amps, &vx);
    let jy = dot_re(amps, &vy);
    let mut jz = 0.0f64;
    for (b, a) in amps.iter().enumerate() {
        let w = a.norm_sqr();
        if w != 0.0 {
            jz += w * (b.count_ones() as f64 - n_atoms as f64 / 2.0);
        }
    }
    let var_jx = dot_re(&vx, &vx) - jx * jx;
    let var_jy = dot_re(&vy, &vy) - jy * jy;
    let cov_sym = dot_re(&vx, &vy) - jx * jy;
    Ok(CollectiveMoments {
        jx,
        jy,
        jz,
        var_jx,
        var_jy,
        cov_sym,
    })
}

/// `Var(J_theta)` with `J_theta = cos(theta) Jx + sin(theta) Jy`.
pub fn variance_theta(psi: &StateVector, theta: f64) -> Result<f64> {
    Ok(collective_moments(psi)?.variance_theta(theta))
}

/// Squeezing parameter `xi^2 = N Var(J_theta) / <J_z>^2`.
pub fn xi_squared(psi: &StateVector, theta: f64) -> Result<f64> {
    let m = collective_moments(psi)?;
    let n = psi.dims().len() as f64;
    xi_squared_from(&m, n, theta)
}

fn xi_squared_from(m: &CollectiveMoments, n: f64, theta: f64) -> Result<f64> {
    let jz_sq = m.jz * m.jz;
    if jz_sq < MEAN_SPIN_FLOOR * n * n {
        return Err(Error::UndefinedSqueezing { t: f64::NAN, jz_sq });
    }
    Ok(n * m.variance_theta(theta) / jz_sq)
}

/// Coarse seeds for the quadrature-angle scan.
const THETA_SEEDS: usize = 49;

fn golden_section_min(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    f: &dyn Fn(f64) -> f64,
) -> (f64, f64) {
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

/// Minimize `Var(J_theta)` over theta: 49 coarse seeds over [-pi/2, pi/2)
/// refined by golden section to `tol`. Flat objectives tie-break to -pi/4.
fn minimize_theta(m: &CollectiveMoments, tol: f64) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    let spacing = pi / THETA_SEEDS as f64;
    let mut best_k = 0usize;
    let mut best_v = f64::INFINITY;
    let mut lo_v = f64::INFINITY;
    let mut hi_v = f64::NEG_INFINITY;
    for k in 0..THETA_SEEDS {
        let theta = -pi / 2.0 + k as f64 * spacing;
        let v = m.variance_theta(theta);
        lo_v = lo_v.min(v);
        hi_v = hi_v.max(v);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    if hi_v - lo_v < 1e-14 * (1.0 + hi_v.abs()) {
        let theta = -pi / 4.0;
        return (theta, m.variance_theta(theta));
    }
    let center = -pi / 2.0 + best_k as f64 * spacing;
    let (theta, value) = golden_section_min(center - spacing, center + spacing, tol, &|th| {
        m.variance_theta(th)
    });
    (wrap_half_pi(theta), value)
}

/// Outcome of the time-and-angle squeezing optimization.
#[derive(Debug, Clone)]
pub struct SqueezingResult {
    /// Optimal time, units of 1/chi.
    pub t_opt: f64,
    /// Optimal quadrature angle, radians.
    pub theta_opt: f64,
    pub xi2_min: f64,
    /// `(<Jx>, <Jy>, <Jz>)` at the optimum.
    pub mean_spin: [f64; 3],
    /// Per-grid-time record: theta_opt, var_min, jz, xi2, xi2_defined.
    pub variance_curve: TimeSeries,
}

/// Minimize `xi^2` over the time grid and the quadrature angle.
///
/// Per grid time the angle is minimized by the coarse-scan plus
/// golden-section scheme; the best grid time is then refined by one
/// parabolic step through its neighbors. Grid times where the mean spin
/// vanishes carry `xi2_defined = 0` in the curve and are skipped.
pub fn minimize_xi(
    cfg: &LatticeConfig,
    map: &CouplingMap,
    t_grid: &[f64],
    theta_refinement_tol: f64,
) -> Result<SqueezingResult> {
    if t_grid.is_empty() {
        return Err(Error::invalid("empty time grid"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("time grid must be strictly increasing"));
    }
    if !(theta_refinement_tol > 0.0) {
        return Err(Error::invalid("theta tolerance must be positive"));
    }
    let evolver = IsingEvolver::new(cfg, map)?;
    let n = evolver.n_atoms() as f64;

    let eval = |t: f64| -> Result<(CollectiveMoments, f64, f64, Option<f64>)> {
        let m = evolver.moments_at(t)?;
        let (theta, var_min) = minimize_theta(&m, theta_refinement_tol);
        let xi2 = match xi_squared_from(&m, n, theta) {
            Ok(v) => Some(v),
            Err(Error::UndefinedSqueezing { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok((m, theta, var_min, xi2))
    };

    let mut curve = TimeSeries::new(
        ["theta_opt", "var_min", "jz", "xi2", "xi2_defined"]
            .into_iter()
            .map(String::from)
            .collect(),
    );
    let mut best: Option<(usize, f64, f64, CollectiveMoments)> = None;
    let mut xi_by_index: Vec<Option<f64>> = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        let (m, theta, var_min, xi2) = eval(t)?;
        curve.push(
            t,
            vec![
                theta,
                var_min,
                m.jz,
                xi2.unwrap_or(0.0),
                if xi2.is_some() { 1.0 } else { 0.0 },
            ],
        )?;
        xi_by_index.push(xi2);
        if let Some(v) = xi2 {
            if best.as_ref().map_or(true, |(_, bv, _, _)| v < *bv) {
                best = Some((i, v, theta, m));
            }
        }
    }
    let (best_i, mut best_xi, mut best_theta, mut best_m) = best.ok_or(
        Error::UndefinedSqueezing {
            t: t_grid[0],
            jz_sq: 0.0,
        },
    )?;
    let mut best_t = t_grid[best_i];

    // parabolic refinement through the neighboring grid points
    if best_i > 0 && best_i + 1 < t_grid.len() {
        if let (Some(f0), Some(f2)) = (xi_by_index[best_i - 1], xi_by_index[best_i + 1]) {
            let (t0, t1, t2) = (t_grid[best_i - 1], t_grid[best_i], t_grid[best_i + 1]);
            let f1 = best_xi;
            let denom = (t1 - t0) * (f1 - f2) - (t1 - t2) * (f1 - f0);
            if denom.abs() > 1e-300 {
                let num = (t1 - t0).powi(2) * (f1 - f2) - (t1 - t2).powi(2) * (f1 - f0);
                let t_star = t1 - 0.5 * num / denom;
                if t_star > t0 && t_star < t2 && t_star != t1 {
                    let (m, theta, _var, xi2) = eval(t_star)?;
                    if let Some(v) = xi2 {
                        if v < best_xi {
                            best_xi = v;
                            best_theta = theta;
                            best_t = t_star;
                            best_m = m;
                        }
                    }
                }
            }
        }
    }

    Ok(SqueezingResult {
        t_opt: best_t,
        theta_opt: best_theta,
        xi2_min: best_xi,
        mean_spin: best_m.mean_spin(),
        variance_curve: curve,
    })
}

/// Options for [`monte_carlo_xi`]: common time grid, angle tolerance and
/// boundary handling for the sampled lattices.
#[derive(Debug, Clone)]
pub struct MonteCarloOptions {
    pub t_grid: Vec<f64>,
    pub theta_tol: f64,
    pub boundary: Boundary,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        MonteCarloOptions {
            t_grid: default_time_grid(),
            theta_tol: 1e-6,
            boundary: Boundary::Open,
        }
    }
}

/// Default squeezing grid: chi t in [0, 1.5] in steps of 0.025.
pub fn default_time_grid() -> Vec<f64> {
    (0..=60).map(|i| i as f64 * 0.025).collect()
}

#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: usize,
    pub n_sites: usize,
    pub xi2_min: f64,
    pub t_opt: f64,
    pub theta_opt: f64,
}

#[derive(Debug, Clone)]
pub struct MonteCarloXi {
    pub mean_xi2_min: f64,
    pub std_error: f64,
    pub trials: Vec<TrialRecord>,
}

/// Independent RNG stream for one trial of a seeded ensemble.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Monte Carlo over lattice fillings: per trial, sample occupations at
/// probability `p`, couple `n_neighbors` visited sites, minimize `xi^2`.
///
/// Trials run in parallel but are aggregated in trial order with
/// compensated summation, so results do not depend on scheduling. All-equal
/// trial values (e.g. `p = 1`) aggregate to that exact value.
pub fn monte_carlo_xi(
    p: f64,
    n_neighbors: usize,
    n_atoms: usize,
    trials: usize,
    seed: u64,
    opts: &MonteCarloOptions,
) -> Result<MonteCarloXi> {
    if trials < 1 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let records: Result<Vec<TrialRecord>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let mut cfg = sample_occupations_with(p, n_atoms, &mut rng)?;
            cfg.boundary = opts.boundary;
            cfg.seed = seed;
            let map = neighbor_coupling_map(&cfg, n_neighbors, opts.boundary)?;
            let res = minimize_xi(&cfg, &map, &opts.t_grid, opts.theta_tol)?;
            Ok(TrialRecord {
                trial,
                n_sites: cfg.n_sites,
                xi2_min: res.xi2_min,
                t_opt: res.t_opt,
                theta_opt: res.theta_opt,
            })
        })
        .collect();
    let records = records?;

    let values: Vec<f64> = records.iter().map(|r| r.xi2_min).collect();
    let all_equal = values.windows(2).all(|w| w[0] == w[1]);
    let mean = if all_equal {
        values[0]
    } else {
        kahan_mean(&values)
    };
    let std_error = if values.len() < 2 || all_equal {
        0.0
    } else {
        let var: f64 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / (values.len() - 1) as f64;
        (var / values.len() as f64).sqrt()
    };
    Ok(MonteCarloXi {
        mean_xi2_min: mean,
        std_error,
        trials: records,
    })
}

fn kahan_mean(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum / values.len() as f64
}

/// Exact distribution of the `|+1/2>` population after rotating the
/// `J_theta` eigenbasis onto the z axis atom by atom.
///
/// The per-atom map sends `(e^{-i theta/2}|1/2> + e^{i theta/2}|-1/2>)/sqrt(2)`
/// to `|1/2>`; the returned vector is indexed by the number of atoms found
/// in `|1/2>`.
pub fn counting_statistics(psi: &StateVector, theta: f64) -> Result<Vec<f64>> {
    if psi.dims().iter().any(|&d| d != 2) {
        return Err(Error::invalid("counting statistics need a qubit register"));
    }
    let n_atoms = psi.dims().len();
    // W = [[1, -e^{i theta}], [1, e^{i theta}]]/sqrt(2) per atom; applied
    // without the 1/sqrt(2) factors, with the exact 2^-n weight restored on
    // the probabilities, so basis-state inputs give binary-exact binomials
    let e = C64::from_polar(1.0, theta);
    let w = ndarray::array![
        [C64::new(1.0, 0.0), -e],
        [C64::new(1.0, 0.0), e]
    ];
    let mut rotated = psi.clone();
    for atom in 0..n_atoms {
        rotated = crate::lattice::apply_single_qubit(&rotated, atom, &w);
    }
    let weight = 0.5f64.powi(n_atoms as i32);
    let mut dist = vec![0.0f64; n_atoms + 1];
    for (b, a) in rotated.amps().iter().enumerate() {
        dist[b.count_ones() as usize] += a.norm_sqr() * weight;
    }
    Ok(dist)
}
