//! Command-line front end for the riqs engines: figure reproduction with
//! canonical parameters, a generic scenario runner driven by TOML configs,
//! and deterministic seeded CSV/JSON emission.

pub mod error;
pub mod figures;
pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};
use std::time::Instant;

use error::{CliError, CliResult};
use figures::FigureName;
use output::{Format, Manifest};

/// `riqs figure <name>` end to end: run, write data file and manifest,
/// print the resolved parameters and seed. Returns the data path.
pub fn figure_command(
    name: &str,
    out: Option<PathBuf>,
    format: &str,
    seed: u64,
    set: &[String],
) -> CliResult<PathBuf> {
    let name = FigureName::parse(name)?;
    let format = Format::parse(format)?;
    let overrides = parse_overrides(set)?;
    let started = Instant::now();
    let figure = figures::run_figure(name, seed, &overrides)?;
    let data_path = out.unwrap_or_else(|| {
        PathBuf::from(format!("{}.{}", name.as_str(), format.extension()))
    });
    output::write_table(&data_path, &figure.table, format)?;

    let mut manifest = Manifest::new(
        format!("figure {}", name.as_str()),
        figure.parameters.clone(),
        seed,
    );
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.outputs = vec![data_path.display().to_string()];
    manifest.results = figure.results;
    manifest.write(&Manifest::manifest_path(&data_path))?;

    println!(
        "figure {}: seed={} parameters={}",
        name.as_str(),
        seed,
        compact_json(&figure.parameters)
    );
    println!(
        "wrote {} ({} rows)",
        data_path.display(),
        figure.table.rows.len()
    );
    Ok(data_path)
}

/// `riqs run <config>` end to end. Returns the data path.
pub fn run_command(config: &Path, out: Option<PathBuf>) -> CliResult<PathBuf> {
    let file = scenario::load_scenario(config)?;
    let started = Instant::now();
    let run = scenario::run_scenario(&file)?;
    let data_path = out
        .or_else(|| run.configured_path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| {
            PathBuf::from(format!("{}.{}", run.default_stem, run.format.extension()))
        });
    output::write_table(&data_path, &run.table, run.format)?;

    let mut manifest = Manifest::new(
        format!("run {}", run.default_stem),
        serde_json::json!({
            "scenario": run.default_stem,
            "section": run.parameters,
            "time": file.time,
            "output_format": file.output.format,
        }),
        run.seed,
    );
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.outputs = vec![data_path.display().to_string()];
    manifest.results = run.results.clone();
    manifest.write(&Manifest::manifest_path(&data_path))?;

    println!(
        "scenario {}: seed={} parameters={}",
        run.default_stem,
        run.seed,
        compact_json(&run.parameters)
    );
    if !run.results.is_null() {
        println!("results: {}", compact_json(&run.results));
    }
    println!("wrote {} ({} rows)", data_path.display(), run.table.rows.len());
    Ok(data_path)
}

fn parse_overrides(set: &[String]) -> CliResult<Vec<(String, String)>> {
    set.iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| {
                    CliError::validation(format!("--set expects key=value, got '{kv}'"))
                })
        })
        .collect()
}

fn compact_json(value: &serde_json::Value) -> String {
    serde_json::to_string(value).unwrap_or_else(|_| "{}".into())
}
