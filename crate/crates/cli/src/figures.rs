//! Figure-reproduction subcommands: canonical parameter sets with optional
//! `--set key=value` overrides, deterministic seeded outputs.

use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};
use riqs_core::iontrap::{gate_trace, Engine, IonTrapParams};
use riqs_core::lattice::{spin_wave_sim, Boundary, HeisenbergCouplings, LatticeConfig};
use riqs_core::squeeze::{
    minimize_xi, monte_carlo_xi, neighbor_coupling_map, IsingEvolver, MonteCarloOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    Fig2a,
    Fig2b,
    Fig4,
    Fig5a,
    Fig5b,
}

impl FigureName {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "fig2a" => Ok(FigureName::Fig2a),
            "fig2b" => Ok(FigureName::Fig2b),
            "fig4" => Ok(FigureName::Fig4),
            "fig5a" => Ok(FigureName::Fig5a),
            "fig5b" => Ok(FigureName::Fig5b),
            other => Err(CliError::validation(format!(
                "unknown figure '{other}' (expected fig2a|fig2b|fig4|fig5a|fig5b)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FigureName::Fig2a => "fig2a",
            FigureName::Fig2b => "fig2b",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5a => "fig5a",
            FigureName::Fig5b => "fig5b",
        }
    }
}

/// Data plus manifest ingredients for one figure run.
pub struct FigureOutput {
    pub table: Table,
    pub parameters: serde_json::Value,
    pub results: serde_json::Value,
}

fn parse_f64(key: &str, value: &str) -> CliResult<f64> {
    value
        .parse::<f64>()
        .map_err(|_| CliError::validation(format!("override {key}: '{value}' is not a number")))
}

fn parse_usize(key: &str, value: &str) -> CliResult<usize> {
    value
        .parse::<usize>()
        .map_err(|_| CliError::validation(format!("override {key}: '{value}' is not an integer")))
}

fn grid(t_max: f64, t_step: f64) -> CliResult<Vec<f64>> {
    if !(t_step > 0.0) || !(t_max > 0.0) {
        return Err(CliError::validation("time grid needs positive t_max and t_step"));
    }
    let n = (t_max / t_step).round() as usize;
    if n == 0 {
        return Err(CliError::validation("time grid is empty"));
    }
    Ok((0..=n).map(|i| i as f64 * t_step).collect())
}

#[derive(Debug, Clone, Serialize)]
struct GateFigureParams {
    delta: f64,
    eta: f64,
    omega: f64,
    n_ions: usize,
    n_max: usize,
    engine: String,
    initial_fock: usize,
    t_max: f64,
    t_step: f64,
}

fn run_gate_figure(mut p: GateFigureParams, overrides: &[(String, String)]) -> CliResult<FigureOutput> {
    for (key, value) in overrides {
        match key.as_str() {
            "delta" => p.delta = parse_f64(key, value)?,
            "eta" => p.eta = parse_f64(key, value)?,
            "omega" => p.omega = parse_f64(key, value)?,
            "n_ions" => p.n_ions = parse_usize(key, value)?,
            "n_max" => p.n_max = parse_usize(key, value)?,
            "engine" => p.engine = value.clone(),
            "initial_fock" => p.initial_fock = parse_usize(key, value)?,
            "t_max" => p.t_max = parse_f64(key, value)?,
            "t_step" => p.t_step = parse_f64(key, value)?,
            _ => return Err(CliError::validation(format!("unknown override key '{key}'"))),
        }
    }
    let params = IonTrapParams {
        nu: 1.0,
        delta: p.delta,
        eta: p.eta,
        omega: p.omega,
        n_ions: p.n_ions,
        n_max: p.n_max,
    };
    params.validate()?;
    let engine = Engine::parse(&p.engine)?;
    let t_grid = grid(p.t_max, p.t_step)?;
    let psi0 = params.ground_with_fock(p.initial_fock)?;
    let series = gate_trace(&params, &psi0, &t_grid, engine)?;
    let table = Table::from_series(
        &series,
        "nu_t",
        &["rho_gg_gg", "im_rho_gg_ee", "rho_ee_ee", "re_rho_gg_ee"],
    );
    Ok(FigureOutput {
        table,
        parameters: serde_json::to_value(&p).expect("serializable"),
        results: serde_json::Value::Null,
    })
}

#[derive(Debug, Clone, Serialize)]
struct WaveFigureParams {
    n_atoms: usize,
    flip_index: usize,
    chi: f64,
    eta_c: f64,
    lambda_c: f64,
    t_max: f64,
    t_step: f64,
    steps_per_interval: usize,
}

fn run_wave_figure(
    mut p: WaveFigureParams,
    overrides: &[(String, String)],
) -> CliResult<FigureOutput> {
    for (key, value) in overrides {
        match key.as_str() {
            "n_atoms" => p.n_atoms = parse_usize(key, value)?,
            "flip_index" => p.flip_index = parse_usize(key, value)?,
            "chi" => p.chi = parse_f64(key, value)?,
            "eta_c" => p.eta_c = parse_f64(key, value)?,
            "lambda_c" => p.lambda_c = parse_f64(key, value)?,
            "t_max" => p.t_max = parse_f64(key, value)?,
            "t_step" => p.t_step = parse_f64(key, value)?,
            "steps_per_interval" => p.steps_per_interval = parse_usize(key, value)?,
            _ => return Err(CliError::validation(format!("unknown override key '{key}'"))),
        }
    }
    let couplings = HeisenbergCouplings {
        chi: p.chi,
        eta_c: p.eta_c,
        lambda_c: p.lambda_c,
    };
    let t_grid = grid(p.t_max, p.t_step)?;
    let series = spin_wave_sim(
        p.n_atoms,
        p.flip_index,
        &couplings,
        &t_grid,
        p.steps_per_interval,
    )?;
    let table = Table::from_series(&series, "t", &[]);
    Ok(FigureOutput {
        table,
        parameters: serde_json::to_value(&p).expect("serializable"),
        results: serde_json::Value::Null,
    })
}

#[derive(Debug, Clone, Serialize)]
struct VarianceFigureParams {
    n_atoms: usize,
    boundary: String,
    max_neighbors: usize,
    t_max: f64,
    t_step: f64,
}

fn run_variance_figure(
    mut p: VarianceFigureParams,
    overrides: &[(String, String)],
) -> CliResult<FigureOutput> {
    for (key, value) in overrides {
        match key.as_str() {
            "n_atoms" => p.n_atoms = parse_usize(key, value)?,
            "boundary" => p.boundary = value.clone(),
            "max_neighbors" => p.max_neighbors = parse_usize(key, value)?,
            "t_max" => p.t_max = parse_f64(key, value)?,
            "t_step" => p.t_step = parse_f64(key, value)?,
            _ => return Err(CliError::validation(format!("unknown override key '{key}'"))),
        }
    }
    if p.max_neighbors == 0 {
        return Err(CliError::validation("max_neighbors must be >= 1"));
    }
    let boundary = Boundary::parse(&p.boundary)?;
    let cfg = LatticeConfig::filled(p.n_atoms, boundary)?;
    let t_grid = grid(p.t_max, p.t_step)?;

    let mut columns = vec!["chi_t".to_string()];
    for v in 1..=p.max_neighbors {
        columns.push(format!("var_min_{v}"));
    }
    let mut table = Table::new(columns);
    let mut evolvers = Vec::new();
    for v in 1..=p.max_neighbors {
        let map = neighbor_coupling_map(&cfg, v, boundary)?;
        evolvers.push(IsingEvolver::new(&cfg, &map)?);
    }
    for &t in &t_grid {
        let mut row = vec![Cell::Float(t)];
        for evolver in &evolvers {
            let m = evolver.moments_at(t)?;
            let theta = m.theta_min();
            row.push(Cell::Float(m.variance_theta(theta)));
        }
        table.push_row(row);
    }
    Ok(FigureOutput {
        table,
        parameters: serde_json::to_value(&p).expect("serializable"),
        results: serde_json::Value::Null,
    })
}

#[derive(Debug, Clone, Serialize)]
struct MonteCarloFigureParams {
    n_atoms: usize,
    trials: usize,
    fillings: Vec<f64>,
    max_neighbors: usize,
    boundary: String,
    t_max: f64,
    t_step: f64,
    theta_tol: f64,
}

fn run_monte_carlo_figure(
    mut p: MonteCarloFigureParams,
    seed: u64,
    overrides: &[(String, String)],
) -> CliResult<FigureOutput> {
    for (key, value) in overrides {
        match key.as_str() {
            "n_atoms" => p.n_atoms = parse_usize(key, value)?,
            "trials" => p.trials = parse_usize(key, value)?,
            "max_neighbors" => p.max_neighbors = parse_usize(key, value)?,
            "boundary" => p.boundary = value.clone(),
            "t_max" => p.t_max = parse_f64(key, value)?,
            "t_step" => p.t_step = parse_f64(key, value)?,
            "theta_tol" => p.theta_tol = parse_f64(key, value)?,
            "fillings" => {
                p.fillings = value
                    .split(';')
                    .map(|s| parse_f64(key, s))
                    .collect::<CliResult<Vec<f64>>>()?;
            }
            _ => return Err(CliError::validation(format!("unknown override key '{key}'"))),
        }
    }
    let boundary = Boundary::parse(&p.boundary)?;
    let opts = MonteCarloOptions {
        t_grid: grid(p.t_max, p.t_step)?,
        theta_tol: p.theta_tol,
        boundary,
    };
    let mut table = Table::new(
        ["p", "n_visited", "trials", "mean_xi2_min", "stderr"]
            .into_iter()
            .map(String::from)
            .collect(),
    );
    for &filling in &p.fillings {
        for v in 1..=p.max_neighbors {
            // full filling has no sampling variance: one trial suffices
            let trials = if filling >= 1.0 { 1 } else { p.trials };
            let mc = monte_carlo_xi(filling, v, p.n_atoms, trials, seed, &opts)?;
            table.push_row(vec![
                Cell::Float(filling),
                Cell::Int(v as i64),
                Cell::Int(trials as i64),
                Cell::Float(mc.mean_xi2_min),
                Cell::Float(mc.std_error),
            ]);
        }
    }
    Ok(FigureOutput {
        table,
        parameters: serde_json::to_value(&p).expect("serializable"),
        results: serde_json::Value::Null,
    })
}

/// Run one named figure with the canonical parameters (plus overrides).
pub fn run_figure(
    name: FigureName,
    seed: u64,
    overrides: &[(String, String)],
) -> CliResult<FigureOutput> {
    match name {
        FigureName::Fig2a => run_gate_figure(
            GateFigureParams {
                delta: 0.9,
                eta: 0.1,
                omega: 0.1,
                n_ions: 2,
                n_max: 20,
                engine: "effective".into(),
                initial_fock: 0,
                t_max: 1600.0,
                t_step: 2.0,
            },
            overrides,
        ),
        FigureName::Fig2b => run_gate_figure(
            GateFigureParams {
                delta: 0.95,
                eta: 0.1,
                omega: 0.177,
                n_ions: 2,
                n_max: 20,
                engine: "effective".into(),
                initial_fock: 0,
                t_max: 300.0,
                t_step: 0.5,
            },
            overrides,
        ),
        FigureName::Fig4 => run_wave_figure(
            WaveFigureParams {
                n_atoms: 15,
                flip_index: 7,
                chi: 1.0,
                eta_c: 1.0,
                lambda_c: 1.0,
                t_max: 6.0,
                t_step: 0.25,
                steps_per_interval: 40,
            },
            overrides,
        ),
        FigureName::Fig5a => run_variance_figure(
            VarianceFigureParams {
                n_atoms: 15,
                boundary: "open".into(),
                max_neighbors: 3,
                t_max: 1.5,
                t_step: 0.01,
            },
            overrides,
        ),
        FigureName::Fig5b => run_monte_carlo_figure(
            MonteCarloFigureParams {
                n_atoms: 15,
                trials: 200,
                fillings: vec![1.0, 0.5, 0.25, 0.1],
                max_neighbors: 3,
                boundary: "open".into(),
                t_max: 1.5,
                t_step: 0.025,
                theta_tol: 1e-6,
            },
            seed,
            overrides,
        ),
    }
}

/// Squeezing summary attached to manifests where applicable.
pub fn squeezing_summary(
    cfg: &LatticeConfig,
    map: &riqs_core::squeeze::CouplingMap,
    t_grid: &[f64],
    theta_tol: f64,
) -> CliResult<(Table, serde_json::Value)> {
    let res = minimize_xi(cfg, map, t_grid, theta_tol)?;
    let table = Table::from_series(&res.variance_curve, "chi_t", &[]);
    let summary = json!({
        "t_opt": res.t_opt,
        "theta_opt": res.theta_opt,
        "xi2_min": res.xi2_min,
        "mean_spin": res.mean_spin,
    });
    Ok((table, summary))
}
