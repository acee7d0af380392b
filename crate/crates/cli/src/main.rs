use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mvsim_cli::circuit::ascii_circuit;
use mvsim_cli::display::{amplitude_table, dirac_form, DEFAULT_TOLERANCE};
use mvsim_cli::experiment::{
    build_schedule, emit, initial_state, render_trace, run_experiment, run_ladder,
};
use mvsim_cli::numfmt::general;
use mvsim_cli::{CliError, CliResult, ExperimentConfig, RawConfig};

#[derive(Parser)]
#[command(
    name = "mvsim",
    version,
    about = "Noisy quantum-register ensemble simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its metrics trace.
    Run(Common),
    /// Rerun an experiment with noise channels replaced by the identity.
    Suppress {
        #[command(flatten)]
        common: Common,
        /// Run X, X+Y, X+Y+Z suppression in turn and print the final fidelities.
        #[arg(long)]
        ladder: bool,
    },
    /// Print the noiseless output state of the schedule.
    ShowState {
        #[command(flatten)]
        common: Common,
        /// Amplitudes below this magnitude are omitted.
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Draw the schedule as an ASCII circuit.
    Draw(Common),
}

#[derive(Args)]
struct Common {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// mv1, mv2, mvn or custom.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    nq: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated channels to suppress: x,y,z,general.
    #[arg(long)]
    suppress: Option<String>,
    /// Worker threads for the ensemble.
    #[arg(long)]
    workers: Option<usize>,
    /// Extra key=value overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn resolve(&self) -> CliResult<ExperimentConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        let flags: [(&str, Option<String>); 9] = [
            ("experiment", self.experiment.clone()),
            ("nq", self.nq.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("steps", self.steps.map(|v| v.to_string())),
            ("paths", self.paths.map(|v| v.to_string())),
            ("format", self.format.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("suppress", self.suppress.clone()),
            ("workers", self.workers.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.insert(key, v)?;
            }
        }
        for o in &self.overrides {
            raw.set(o)?;
        }
        raw.resolve()
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(common) => {
            let config = common.resolve()?;
            let run = run_experiment(&config)?;
            emit(&render_trace(&run, config.format), config.out.as_deref())
        }
        Command::Suppress { common, ladder } => {
            let config = common.resolve()?;
            if ladder {
                let mut text = String::from("suppressed,final_fidelity\n");
                for (set, run) in run_ladder(&config)? {
                    let names: Vec<&str> = set.iter().map(|c| c.name()).collect();
                    let label = if names.is_empty() {
                        "none".to_string()
                    } else {
                        names.join("+")
                    };
                    text.push_str(&format!(
                        "{label},{}\n",
                        general(run.trace.last().fidelity, 6)
                    ));
                }
                return emit(text.as_bytes(), config.out.as_deref());
            }
            if config.model.suppressed.is_empty() {
                return Err(CliError::Config(
                    "suppress needs --suppress CHANNELS or --ladder".into(),
                ));
            }
            let run = run_experiment(&config)?;
            emit(&render_trace(&run, config.format), config.out.as_deref())
        }
        Command::ShowState { common, tolerance } => {
            let config = common.resolve()?;
            let schedule = build_schedule(&config)?;
            let psi = schedule.ideal_output(&initial_state(&config)?)?;
            let text = format!(
                "{}\n\n{}",
                dirac_form(&psi, tolerance),
                amplitude_table(&psi, tolerance)
            );
            emit(text.as_bytes(), config.out.as_deref())
        }
        Command::Draw(common) => {
            let config = common.resolve()?;
            let schedule = build_schedule(&config)?;
            emit(ascii_circuit(&schedule).as_bytes(), config.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mvsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
