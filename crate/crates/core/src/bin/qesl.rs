use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qesl_core::bounds::{BoundKind, EslMode};
use qesl_core::cli::config::{GridConfig, OutputConfig};
use qesl_core::cli::{exit_code, load_config, ree_of_literal, run, Parameters, RunConfig, ScenarioKind, Units};
use qesl_core::measures::SolverConfig;
use qesl_core::scenarios::{DephasingParams, NonlocalParams};
use qesl_core::{Error, Result};

/// Speed limits on entanglement for two-qubit dynamics.
#[derive(Parser)]
#[command(name = "qesl", version)]
struct Cli {
    /// Log more (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `outputs.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Overrides `outputs.svg`.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run a built-in example from flags.
    Scenario {
        #[command(subcommand)]
        which: ScenarioCommand,
    },
    /// Relative entropy of entanglement of a state in a JSON matrix file.
    Ree {
        #[arg(long)]
        state: PathBuf,
        /// Local dimensions, e.g. `2,3`; two qubits when omitted.
        #[arg(long, value_parser = parse_dims)]
        dims: Option<[usize; 2]>,
        #[arg(long, default_value_t = SolverConfig::default().restarts)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// `μx XX + μy YY + μz ZZ` acting on `√p|00⟩ + √(1−p)|11⟩`.
    Nonlocal {
        #[arg(long)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu_z: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Local pure dephasing at rate `γ` on both qubits.
    Dephasing {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        gamma: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, default_value_t = GridConfig::default().t1)]
    t1: f64,
    #[arg(long, default_value_t = GridConfig::default().steps)]
    steps: usize,
    #[arg(long, value_enum)]
    bound: Option<BoundArg>,
    #[arg(long, value_enum, default_value_t = ModeArg::Change)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = UnitsArg::Nats)]
    units: UnitsArg,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArg {
    Cptp,
    Unitary,
    UnitaryPure,
    Trace,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Change,
    Generate,
    Degrade,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    Nats,
    Bits,
}

impl From<BoundArg> for BoundKind {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::Cptp => BoundKind::Cptp,
            BoundArg::Unitary => BoundKind::Unitary,
            BoundArg::UnitaryPure => BoundKind::UnitaryPure,
            BoundArg::Trace => BoundKind::Trace,
        }
    }
}

/// Builds the same JSON document a config file would hold and parses it, so
/// flag runs get exactly the validation of file runs.
fn scenario_config(which: ScenarioCommand) -> Result<RunConfig> {
    let (scenario, parameters, common) = match which {
        ScenarioCommand::Nonlocal {
            p,
            delta,
            theta,
            mu_z,
            common,
        } => (
            ScenarioKind::Nonlocal,
            Parameters::Nonlocal(NonlocalParams { p, delta, theta, mu_z }),
            common,
        ),
        ScenarioCommand::Dephasing { p, gamma, common } => (
            ScenarioKind::Dephasing,
            Parameters::Dephasing(DephasingParams { p, gamma }),
            common,
        ),
    };
    let doc = serde_json::json!({
        "scenario": scenario,
        "parameters": parameters,
        "grid": GridConfig { t1: common.t1, steps: common.steps },
        "outputs": OutputConfig {
            csv: common.csv,
            svg: common.svg,
            units: match common.units {
                UnitsArg::Nats => Units::Nats,
                UnitsArg::Bits => Units::Bits,
            },
        },
        "bound": common.bound.map(BoundKind::from),
        "mode": match common.mode {
            ModeArg::Change => EslMode::Change,
            ModeArg::Generate => EslMode::Generate,
            ModeArg::Degrade => EslMode::Degrade,
        },
        "seed": common.seed,
    });
    qesl_core::cli::parse_config(&doc.to_string())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config, csv, svg } => {
            let mut cfg = load_config(&config)?;
            if csv.is_some() {
                cfg.outputs.csv = csv;
            }
            if svg.is_some() {
                cfg.outputs.svg = svg;
            }
            print_json(&run(&cfg)?.summary())
        }
        Command::Scenario { which } => print_json(&run(&scenario_config(which)?)?.summary()),
        Command::Ree {
            state,
            dims,
            restarts,
            seed,
        } => {
            let text = qesl_core::cli::read_input(&state)?;
            let solver = SolverConfig {
                restarts,
                ..Default::default()
            };
            print_json(&ree_of_literal(&text, dims, &solver, seed)?)
        }
    }
}

fn parse_dims(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.parse().map_err(|e| format!("`{a}`: {e}"))?,
            b.parse().map_err(|e| format!("`{b}`: {e}"))?,
        ]),
        _ => Err(format!("expected two comma-separated dimensions, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
