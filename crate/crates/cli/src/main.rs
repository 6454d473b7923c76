//! Command-line front end: `fracsub run` and `fracsub emit`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracsub::scenario::{emit_plotdata, run, Scenario};
use fracsub::Error;

#[derive(Parser)]
#[command(name = "fracsub", version, about = "Fractional sublinear equation: solver and verification scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the enabled checks and write report.txt plus CSV tables.
    Run(Common),
    /// Write only the plotting CSVs (decay, ladder gaps, ratio curves).
    Emit(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file with `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default 1, which keeps reruns byte-identical).
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn load(common: &Common) -> Result<Scenario, Error> {
    if common.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    let mut scenario = Scenario::from_file(&common.config)?;
    if let Some(out) = &common.out {
        scenario.output = out.clone();
    }
    Ok(scenario)
}

fn execute(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Run(common) => {
            let scenario = load(&common)?;
            let outcome = run(&scenario)?;
            print!("{}", outcome.report(&scenario));
            Ok(if outcome.all_pass() { 0 } else { 4 })
        }
        Command::Emit(common) => {
            let scenario = load(&common)?;
            for path in emit_plotdata(&scenario)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
