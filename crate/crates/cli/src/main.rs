use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use implicit_online::{Algorithm, Task};
use implicit_online_cli::config::{resolve, ConfigLayer, ExperimentConfig};
use implicit_online_cli::{cmd_check, cmd_sweep, cmd_synthetic, CheckParams, CliError, Fault};

#[derive(Parser)]
#[command(name = "implicit-online", version, about = "Online learning with implicit updates: experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the learners on the slowly drifting sine sequence.
    Synthetic(ExperimentArgs),
    /// Sweep beta over a log2 grid on a LIBSVM dataset.
    Sweep(ExperimentArgs),
    /// Verify the regret certificates and update invariants.
    Check(CheckArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML file with configuration defaults; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// LIBSVM dataset (sweep); defaults to the bundled sample.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, value_parser = parse_task)]
    task: Option<Task>,
    /// Comma-separated algorithms: ogd, adaogd, implicit, implicit-const,
    /// adaimplicit, doubling.
    #[arg(long = "algo", value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_lo_exp: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    grid_hi_exp: Option<i32>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon of the synthetic sequence.
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Radius of the feasible L2 ball.
    #[arg(long)]
    radius: Option<f64>,
    /// Also run AdaImplicit with beta at the Bregman diameter.
    #[arg(long)]
    theory_beta: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Reduced trial counts.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report as JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

fn parse_task(s: &str) -> Result<Task, String> {
    s.parse().map_err(|e: implicit_online::Error| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: implicit_online::Error| e.to_string())
}

impl ExperimentArgs {
    fn resolve(&self, defaults: ExperimentConfig) -> Result<ExperimentConfig, CliError> {
        let file = self.config.as_deref().map(ConfigLayer::load).transpose()?;
        let flags = ConfigLayer {
            task: self.task,
            loss_family: None,
            beta: self.beta,
            grid_lo_exp: self.grid_lo_exp,
            grid_hi_exp: self.grid_hi_exp,
            grid_points: self.grid_points,
            repeats: self.repeats,
            seed: self.seed,
            horizon: self.horizon,
            radius: self.radius,
            algorithms: self.algorithms.clone(),
            dataset: self.dataset.clone(),
            theory_beta: self.theory_beta.then_some(true),
            out: self.out.clone(),
        };
        resolve(defaults, file.as_ref(), &flags)
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Synthetic(args) => {
            let cfg = args.resolve(ExperimentConfig::synthetic_defaults())?;
            let report = cmd_synthetic(&cfg)?;
            for (name, loss) in &report.final_cumulative_loss {
                println!("{name:>20}  L_T = {loss:.6e}");
            }
            for cert in &report.certificates {
                println!("{cert}");
            }
            println!("wrote {}", cfg.out.display());
            Ok(true)
        }
        Command::Sweep(args) => {
            let cfg = args.resolve(ExperimentConfig::sweep_defaults())?;
            let report = cmd_sweep(&cfg)?;
            println!(
                "{} cells in {:.2}s; wrote {}",
                report.summary.len() * cfg.repeats,
                report.wall_clock_seconds,
                cfg.out.display()
            );
            Ok(true)
        }
        Command::Check(args) => {
            let mut params = if args.quick { CheckParams::quick() } else { CheckParams::full() };
            if let Some(seed) = args.seed {
                params.seed = seed;
            }
            params.fault = args.inject_fault.as_deref().map(str::parse::<Fault>).transpose()?;
            let report = cmd_check(&params)?;
            for o in &report.outcomes {
                println!("{o}");
            }
            if let Some(path) = &args.out {
                let text = serde_json::to_string_pretty(&report)?;
                std::fs::write(path, text + "\n").map_err(|e| CliError::Io { path: path.clone(), source: e })?;
            }
            let failed: Vec<&str> = report.failures().map(|o| o.name.as_str()).collect();
            if failed.is_empty() {
                println!("all {} checks hold", report.outcomes.len());
            } else {
                println!("failed: {}", failed.join(", "));
            }
            Ok(failed.is_empty())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
