//! Experiment harness behind the `bench` binary.

pub mod config;
pub mod data;
pub mod output;
pub mod runners;

use std::path::Path;

pub use config::ExperimentConfig;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Optimize,
    Lpreg,
    Vmv,
    Scores,
}

/// Runs one subcommand and returns the produced files without writing them.
pub fn run(sub: Subcommand, cfg: &ExperimentConfig, svg: bool) -> Result<runners::Outputs> {
    match sub {
        Subcommand::Optimize => runners::run_optimize(cfg, svg),
        Subcommand::Lpreg => runners::run_lpreg(cfg, svg),
        Subcommand::Vmv => runners::run_vmv(cfg, svg),
        Subcommand::Scores => runners::run_scores(cfg, svg),
    }
}

/// Runs a subcommand and writes its files (plus the resolved config) to `dir`.
pub fn run_to_dir(sub: Subcommand, cfg: &ExperimentConfig, dir: &Path, svg: bool) -> Result<Vec<String>> {
    let outputs = run(sub, cfg, svg)?;
    output::write_file(dir, "config.toml", &cfg.to_text())?;
    let mut names = Vec::with_capacity(outputs.len());
    for (name, contents) in outputs {
        output::write_file(dir, &name, &contents)?;
        names.push(name);
    }
    Ok(names)
}
