use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swssb_cli::config::{ExperimentConfig, Kind};
use swssb_cli::{execute, validate, EXIT_CONFIG, EXIT_FAILED, EXIT_OK};

#[derive(Parser)]
#[command(name = "swssb", version, about = "Strong-to-weak symmetry breaking diagnostics and RBIM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for data files and manifest.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the parallel core (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Random checks of C^W <= F <= sqrt(C^W).
    BoundsFuzz(RunArgs),
    /// Canonical purification round trips and doubled symmetry.
    TfdCheck(RunArgs),
    /// Block-ensemble formulas and the spin-glass susceptibility.
    SpinGlass(RunArgs),
    /// Thermal C^W in canonical and grand-canonical ensembles against the charge gap.
    ThermalScan(RunArgs),
    /// Exact decohered 2D Ising correlators and the RBIM mapping check.
    DecoheredIsingExact(RunArgs),
    /// Monte Carlo estimate of the Nishimori critical point.
    RbimMc(RunArgs),
    /// Wightman susceptibility against the perturbed purification.
    Susceptibility(RunArgs),
    /// Entropy response to a strongly symmetric mixing channel.
    EntropyResponse(RunArgs),
    /// Validate a config without running it.
    Validate {
        config: PathBuf,
        /// Kind to validate against when the config does not name one.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
}

fn load(path: Option<&Path>) -> Result<ExperimentConfig, String> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    ExperimentConfig::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(kind: Kind, args: RunArgs) -> u8 {
    let mut config = match load(args.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG as u8;
        }
    };
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if let Some(n) = args.threads {
        configure_threads(n);
    }
    match execute(&config, Some(kind), &args.out) {
        Ok(m) => {
            for c in &m.checks {
                let status = if c.passed { "pass" } else if c.hard { "FAIL" } else { "warn" };
                println!("{status:<4} {}: {}", c.name, c.detail);
            }
            if let Some(e) = &m.error {
                eprintln!("error: {e}");
            }
            println!("wrote {} files to {} in {:.2} s", m.outputs.len() + 1, args.out.display(), m.wall_time_s);
            if m.passed { EXIT_OK as u8 } else { EXIT_FAILED as u8 }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as u8
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(n: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        eprintln!("warning: could not size the thread pool: {e}");
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_: usize) {
    eprintln!("warning: built without the parallel feature; --threads is ignored");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::BoundsFuzz(a) => run(Kind::BoundsFuzz, a),
        Command::TfdCheck(a) => run(Kind::TfdCheck, a),
        Command::SpinGlass(a) => run(Kind::SpinGlass, a),
        Command::ThermalScan(a) => run(Kind::ThermalScan, a),
        Command::DecoheredIsingExact(a) => run(Kind::DecoheredIsingExact, a),
        Command::RbimMc(a) => run(Kind::RbimMc, a),
        Command::Susceptibility(a) => run(Kind::Susceptibility, a),
        Command::EntropyResponse(a) => run(Kind::EntropyResponse, a),
        Command::Validate { config, kind } => match load(Some(&config)) {
            Ok(c) => {
                let v = validate(&c, kind);
                if v.is_empty() {
                    println!("ok");
                    EXIT_OK as u8
                } else {
                    for x in &v {
                        println!("{x}");
                    }
                    EXIT_CONFIG as u8
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG as u8
            }
        },
    };
    ExitCode::from(code)
}
