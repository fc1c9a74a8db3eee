use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use nonpsd_sketch::bench::{run_to_dir, ExperimentConfig, Subcommand};
use nonpsd_sketch::SketchError;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Optimize,
    Lpreg,
    Vmv,
    Scores,
}

/// Runs sketching experiments from a flat key/value config file.
#[derive(Parser, Debug)]
#[command(name = "bench", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Base seed; overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `out` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
}

fn run(cli: &Cli) -> Result<(), SketchError> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.out));
    let sub = match cli.command {
        Command::Optimize => Subcommand::Optimize,
        Command::Lpreg => Subcommand::Lpreg,
        Command::Vmv => Subcommand::Vmv,
        Command::Scores => Subcommand::Scores,
    };
    for name in run_to_dir(sub, &cfg, &out, cli.svg)? {
        println!("{}", out.join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("bad arguments").trim_start_matches("error: ");
            eprintln!("E_USAGE: {first}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("{}: {msg}", e.code());
            ExitCode::from(1)
        }
    }
}
