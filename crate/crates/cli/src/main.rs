//! `oos`: trade curves and model-vs-simulation reports for an on-orbit
//! servicing system.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error,
//! 3 one or more fill-rate points failed to converge (output still written).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oos_core::report::{self, AnalysisRow, ComparisonRow};
use oos_core::scenario::{ScenarioConfig, ScenarioModel};
use oos_core::simulator::{self, SimConfig, SimScenario};
use oos_core::solver;
use oos_core::ModelError;

#[derive(Parser)]
#[command(name = "oos", version, about = "On-orbit servicing queue/depot model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the coupled model for every fill-rate requirement.
    Analyze {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Simulate the system at a fixed depot capacity.
    Simulate {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        capacity: u64,
        #[command(flatten)]
        sim: SimArgs,
        /// Write an event trace of the first replication to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Solve, then simulate at each solved capacity.
    Compare {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Args)]
struct IoArgs {
    /// Scenario JSON; omitted fields take the reference values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    replications: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Config { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Whether every solver point converged.
struct Outcome {
    complete: bool,
}

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig, Failure> {
    match path {
        None => Ok(ScenarioConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?;
            ScenarioConfig::from_json_str(&text).map_err(Failure::from)
        }
    }
}

fn sim_config(cfg: &ScenarioConfig, args: &SimArgs) -> Result<SimConfig, Failure> {
    let mut sim = cfg.simulation;
    if let Some(r) = args.replications {
        sim.replications = r;
    }
    if let Some(s) = args.seed {
        sim.seed = s;
    }
    sim.validate().map_err(|reason| {
        Failure::from(ModelError::Config {
            path: "simulation".into(),
            reason,
        })
    })?;
    Ok(sim)
}

/// Output is buffered and written only once the command has succeeded.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn analysis_rows(cfg: &ScenarioConfig) -> Result<(Vec<AnalysisRow>, bool), Failure> {
    let model = ScenarioModel::<f64>::from_config(cfg)?;
    let base = solver::solve_no_stockout(&model)?;
    let results = solver::sweep(&model, &cfg.phi_req, &cfg.solver.options());
    let mut complete = true;
    let mut rows = Vec::with_capacity(results.len() + 1);
    for (&phi, r) in cfg.phi_req.iter().zip(&results) {
        match r {
            Ok(_) => {}
            Err(ModelError::NonConvergence { .. }) => {
                log::warn!("fill rate {phi}: {}", r.as_ref().unwrap_err());
                complete = false;
            }
            Err(e) => return Err(Failure::Runtime(format!("fill rate {phi}: {e}"))),
        }
        rows.push(AnalysisRow::from_result(phi, r));
    }
    rows.push(AnalysisRow::no_stockout(&base));
    Ok((rows, complete))
}

fn analyze(io: &IoArgs) -> Result<Outcome, Failure> {
    let cfg = load_config(io.config.as_deref())?;
    let (rows, complete) = analysis_rows(&cfg)?;
    let mut buf = Vec::new();
    report::write_analysis(&rows, &mut buf)?;
    emit(io.out.as_deref(), &buf)?;
    Ok(Outcome { complete })
}

fn simulate(
    io: &IoArgs,
    capacity: u64,
    args: &SimArgs,
    trace: Option<&Path>,
) -> Result<Outcome, Failure> {
    let cfg = load_config(io.config.as_deref())?;
    let sim = sim_config(&cfg, args)?;
    let scn = SimScenario::from_config(&cfg, capacity)?;
    let batch = simulator::run_batch(&scn, &sim)?;
    let mut buf = Vec::new();
    report::write_simulation(&batch, &mut buf)?;
    if let Some(path) = trace {
        let (_, records) = simulator::run_replication_traced(&scn, &sim, 0)?;
        let mut tbuf = Vec::new();
        simulator::write_trace_csv(&records, &mut tbuf)?;
        fs::write(path, tbuf)?;
    }
    emit(io.out.as_deref(), &buf)?;
    Ok(Outcome { complete: true })
}

fn compare(io: &IoArgs, args: &SimArgs) -> Result<Outcome, Failure> {
    let cfg = load_config(io.config.as_deref())?;
    let sim = sim_config(&cfg, args)?;
    let (rows, complete) = analysis_rows(&cfg)?;
    let mut table = Vec::with_capacity(rows.len());
    for analysis in rows {
        let simulation = match (analysis.phi_req, analysis.capacity) {
            (Some(_), Some(c)) => Some(simulator::run_batch(
                &SimScenario::from_config(&cfg, c)?,
                &sim,
            )?),
            _ => None,
        };
        table.push(ComparisonRow {
            analysis,
            simulation,
        });
    }
    let mut buf = Vec::new();
    report::write_comparison(&table, &mut buf)?;
    emit(io.out.as_deref(), &buf)?;
    Ok(Outcome { complete })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { io } => analyze(io),
        Command::Simulate {
            io,
            capacity,
            sim,
            trace,
        } => simulate(io, *capacity, sim, trace.as_deref()),
        Command::Compare { io, sim } => compare(io, sim),
    };
    match result {
        Ok(Outcome { complete: true }) => ExitCode::SUCCESS,
        Ok(Outcome { complete: false }) => {
            eprintln!("error: some fill-rate points did not converge");
            ExitCode::from(3)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
