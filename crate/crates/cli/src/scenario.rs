//! Generic scenario runner: TOML configs with one section per scenario
//! kind, validated before any computation, dispatched to the owning engine.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::figures::squeezing_summary;
use crate::output::{Cell, Format, Table};
use riqs_core::dicke::{ghz_fidelity, kicked_rotor_step, one_axis_twist, DickeState};
use riqs_core::iontrap::{gate_trace, Engine, IonTrapParams};
use riqs_core::lattice::{
    sample_occupations, spin_wave_sim, Boundary, HeisenbergCouplings, LatticeConfig,
};
use riqs_core::squeeze::{monte_carlo_xi, neighbor_coupling_map, MonteCarloOptions};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSection,
    pub time: Option<TimeSection>,
    #[serde(rename = "iontrap-gate")]
    pub iontrap_gate: Option<IontrapGateSection>,
    pub ghz: Option<GhzSection>,
    #[serde(rename = "kicked-rotor")]
    pub kicked_rotor: Option<KickedRotorSection>,
    #[serde(rename = "spin-wave")]
    pub spin_wave: Option<SpinWaveSection>,
    pub squeezing: Option<SqueezingSection>,
    #[serde(rename = "monte-carlo")]
    pub monte_carlo: Option<MonteCarloSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "csv".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            path: None,
            format: default_format(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TimeSection {
    fn grid(&self) -> CliResult<Vec<f64>> {
        if self.points == 0 {
            return Err(CliError::validation("time.points must be >= 1"));
        }
        if !(self.stop > self.start) {
            return Err(CliError::validation("time.stop must exceed time.start"));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| self.start + i as f64 * step)
            .collect())
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IontrapGateSection {
    pub delta: f64,
    pub eta: f64,
    pub omega: f64,
    #[serde(default = "default_two")]
    pub n_ions: usize,
    #[serde(default = "default_nmax")]
    pub n_max: usize,
    #[serde(default = "default_engine")]
    pub engine: String,
    #[serde(default)]
    pub initial_fock: usize,
}

fn default_two() -> usize {
    2
}
fn default_nmax() -> usize {
    20
}
fn default_engine() -> String {
    "effective".into()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GhzSection {
    pub n_qubits: u32,
    #[serde(default = "default_half_pi")]
    pub twist: f64,
}

fn default_half_pi() -> f64 {
    std::f64::consts::FRAC_PI_2
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KickedRotorSection {
    /// Ensemble size N = 2J.
    pub n_qubits: u32,
    pub kick: f64,
    pub rotation: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpinWaveSection {
    pub n_atoms: usize,
    pub flip_index: usize,
    #[serde(default = "default_one")]
    pub chi: f64,
    #[serde(default = "default_one")]
    pub eta_c: f64,
    #[serde(default = "default_one")]
    pub lambda_c: f64,
    #[serde(default = "default_steps")]
    pub steps_per_interval: usize,
}

fn default_one() -> f64 {
    1.0
}
fn default_steps() -> usize {
    40
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezingSection {
    pub n_atoms: usize,
    #[serde(default = "default_boundary")]
    pub boundary: String,
    pub n_neighbors: usize,
    /// Filling probability; below 1 the lattice is sampled with the seed.
    #[serde(default = "default_one")]
    pub p: f64,
    #[serde(default = "default_theta_tol")]
    pub theta_tol: f64,
}

fn default_boundary() -> String {
    "open".into()
}
fn default_theta_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    pub p: f64,
    pub n_neighbors: usize,
    #[serde(default = "default_fifteen")]
    pub n_atoms: usize,
    pub trials: usize,
    #[serde(default = "default_boundary")]
    pub boundary: String,
    #[serde(default = "default_theta_tol")]
    pub theta_tol: f64,
}

fn default_fifteen() -> usize {
    15
}

/// Parsed scenario plus everything the manifest needs.
pub struct ScenarioOutput {
    pub table: Table,
    pub results: serde_json::Value,
    pub default_stem: String,
    pub format: Format,
    pub configured_path: Option<String>,
    pub parameters: serde_json::Value,
    pub seed: u64,
}

pub fn load_scenario(path: &Path) -> CliResult<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("cannot read config {}: {e}", path.display()))
    })?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|e| {
        // toml errors carry line/column context in their display form
        CliError::validation(format!("config {}: {e}", path.display()))
    })?;
    Ok(file)
}

pub fn run_scenario(file: &ScenarioFile) -> CliResult<ScenarioOutput> {
    let format = Format::parse(&file.output.format)?;
    let seed = file.seed;
    let section_err = |kind: &str| {
        CliError::validation(format!(
            "scenario '{kind}' needs a [{kind}] section in the config"
        ))
    };
    let (table, results, parameters) = match file.scenario.as_str() {
        "iontrap-gate" => {
            let sec = file.iontrap_gate.as_ref().ok_or_else(|| section_err("iontrap-gate"))?;
            let time = file
                .time
                .as_ref()
                .ok_or_else(|| CliError::validation("iontrap-gate needs a [time] section"))?;
            let grid = time.grid()?;
            let params = IonTrapParams {
                nu: 1.0,
                delta: sec.delta,
                eta: sec.eta,
                omega: sec.omega,
                n_ions: sec.n_ions,
                n_max: sec.n_max,
            };
            params.validate()?;
            let engine = Engine::parse(&sec.engine)?;
            let psi0 = params.ground_with_fock(sec.initial_fock)?;
            let series = gate_trace(&params, &psi0, &grid, engine)?;
            let table = Table::from_series(
                &series,
                "nu_t",
                &["rho_gg_gg", "im_rho_gg_ee", "rho_ee_ee", "re_rho_gg_ee"],
            );
            (table, serde_json::Value::Null, serde_json::to_value(sec).unwrap())
        }
        "ghz" => {
            let sec = file.ghz.as_ref().ok_or_else(|| section_err("ghz"))?;
            let state = one_axis_twist(&DickeState::ground(sec.n_qubits)?, sec.twist);
            let (fidelity, phi_g, phi_e) = ghz_fidelity(&state);
            let mut table = Table::new(
                ["n_qubits", "twist", "ghz_fidelity", "phi_g", "phi_e"]
                    .into_iter()
                    .map(String::from)
                    .collect(),
            );
            table.push_row(vec![
                Cell::Int(sec.n_qubits as i64),
                Cell::Float(sec.twist),
                Cell::Float(fidelity),
                Cell::Float(phi_g),
                Cell::Float(phi_e),
            ]);
            let results = json!({ "ghz_fidelity": fidelity, "phi_g": phi_g, "phi_e": phi_e });
            (table, results, serde_json::to_value(sec).unwrap())
        }
        "kicked-rotor" => {
            let sec = file.kicked_rotor.as_ref().ok_or_else(|| section_err("kicked-rotor"))?;
            if sec.steps == 0 {
                return Err(CliError::validation("kicked-rotor needs steps >= 1"));
            }
            let two_j = sec.n_qubits;
            let jx = riqs_core::dicke::collective_op(two_j, riqs_core::dicke::CollectiveOp::Jx);
            let jy = riqs_core::dicke::collective_op(two_j, riqs_core::dicke::CollectiveOp::Jy);
            let jz = riqs_core::dicke::collective_op(two_j, riqs_core::dicke::CollectiveOp::Jz);
            let mut state = DickeState::ground(two_j)?;
            let mut table = Table::new(
                ["step", "jx", "jy", "jz"].into_iter().map(String::from).collect(),
            );
            let expect = |s: &DickeState, op: &riqs_core::hilbert::OperatorMatrix| -> CliResult<f64> {
                let sv = riqs_core::hilbert::StateVector::new(
                    vec![s.dim()],
                    s.amps().clone(),
                )?;
                Ok(riqs_core::hilbert::expectation_hermitian(&sv, op)?)
            };
            for step in 0..=sec.steps {
                if step > 0 {
                    state = kicked_rotor_step(&state, sec.kick, sec.rotation);
                }
                table.push_row(vec![
                    Cell::Int(step as i64),
                    Cell::Float(expect(&state, &jx)?),
                    Cell::Float(expect(&state, &jy)?),
                    Cell::Float(expect(&state, &jz)?),
                ]);
            }
            (table, serde_json::Value::Null, serde_json::to_value(sec).unwrap())
        }
        "spin-wave" => {
            let sec = file.spin_wave.as_ref().ok_or_else(|| section_err("spin-wave"))?;
            let time = file
                .time
                .as_ref()
                .ok_or_else(|| CliError::validation("spin-wave needs a [time] section"))?;
            let grid = time.grid()?;
            let couplings = HeisenbergCouplings {
                chi: sec.chi,
                eta_c: sec.eta_c,
                lambda_c: sec.lambda_c,
            };
            let series = spin_wave_sim(
                sec.n_atoms,
                sec.flip_index,
                &couplings,
                &grid,
                sec.steps_per_interval,
            )?;
            let table = Table::from_series(&series, "t", &[]);
            (table, serde_json::Value::Null, serde_json::to_value(sec).unwrap())
        }
        "squeezing" => {
            let sec = file.squeezing.as_ref().ok_or_else(|| section_err("squeezing"))?;
            let time = file
                .time
                .as_ref()
                .ok_or_else(|| CliError::validation("squeezing needs a [time] section"))?;
            let grid = time.grid()?;
            let boundary = Boundary::parse(&sec.boundary)?;
            let cfg = if sec.p >= 1.0 {
                LatticeConfig::filled(sec.n_atoms, boundary)?
            } else {
                let mut cfg = sample_occupations(sec.p, sec.n_atoms, seed)?;
                cfg.boundary = boundary;
                cfg
            };
            let map = neighbor_coupling_map(&cfg, sec.n_neighbors, boundary)?;
            let (table, summary) = squeezing_summary(&cfg, &map, &grid, sec.theta_tol)?;
            (table, summary, serde_json::to_value(sec).unwrap())
        }
        "monte-carlo" => {
            let sec = file.monte_carlo.as_ref().ok_or_else(|| section_err("monte-carlo"))?;
            let time = file
                .time
                .as_ref()
                .ok_or_else(|| CliError::validation("monte-carlo needs a [time] section"))?;
            let opts = MonteCarloOptions {
                t_grid: time.grid()?,
                theta_tol: sec.theta_tol,
                boundary: Boundary::parse(&sec.boundary)?,
            };
            let mc = monte_carlo_xi(sec.p, sec.n_neighbors, sec.n_atoms, sec.trials, seed, &opts)?;
            let mut table = Table::new(
                ["trial", "n_sites", "xi2_min", "t_opt", "theta_opt"]
                    .into_iter()
                    .map(String::from)
                    .collect(),
            );
            for rec in &mc.trials {
                table.push_row(vec![
                    Cell::Int(rec.trial as i64),
                    Cell::Int(rec.n_sites as i64),
                    Cell::Float(rec.xi2_min),
                    Cell::Float(rec.t_opt),
                    Cell::Float(rec.theta_opt),
                ]);
            }
            let results = json!({
                "mean_xi2_min": mc.mean_xi2_min,
                "std_error": mc.std_error,
                "trials": mc.trials.len(),
            });
            (table, results, serde_json::to_value(sec).unwrap())
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown scenario '{other}' (expected iontrap-gate|ghz|kicked-rotor|spin-wave|squeezing|monte-carlo)"
            )))
        }
    };
    Ok(ScenarioOutput {
        table,
        results,
        default_stem: file.scenario.clone(),
        format,
        configured_path: file.output.path.clone(),
        parameters,
        seed,
    })
}
