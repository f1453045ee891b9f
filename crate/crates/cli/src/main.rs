use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "riqs",
    version,
    about = "State-vector engines for reduced-instruction-set quantum devices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce a canonical figure (fig2a|fig2b|fig4|fig5a|fig5b)
    Figure {
        /// Figure name
        name: String,
        /// Output data file (default: <name>.<ext>)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format: csv or json
        #[arg(long, default_value = "csv")]
        format: String,
        /// RNG seed for stochastic figures
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Parameter overrides, key=value (repeatable)
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run a scenario described by a TOML config file
    Run {
        /// Path to the scenario config
        config: PathBuf,
        /// Output data file (overrides the config's output.path)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Figure {
            name,
            out,
            format,
            seed,
            set,
        } => riqs::figure_command(&name, out, &format, seed, &set).map(|_| ()),
        Command::Run { config, out } => riqs::run_command(&config, out).map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("riqs: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
