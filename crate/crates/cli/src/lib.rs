//! Scenario runner for the hybrid magnon-photon beam splitter: figure
//! reproductions, parameter sweeps, single characterizations and the
//! acceptance suite, all emitting self-describing CSV.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod model;
pub mod output;
pub mod scenarios;
pub mod units;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::Config;
use crate::output::{check_out_dir, write_tables, RunContext, Table};

#[derive(Debug, Parser)]
#[command(
    name = "nhbs",
    version,
    about = "Hybrid magnon-photon beam-splitter simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration; every key has a default.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Existing directory the CSV files are written to.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for independent sweep points (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Replace one configuration value, e.g. `grid.n_z=201`. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Storage profiles, envelope overlap and g2 versus storage control.
    Fig2,
    /// phi_rt calibration and g2 versus delay and phase.
    Fig3,
    /// Three-photon g3 surface.
    Fig4,
    /// One-parameter sweep of the held-control experiment.
    Sweep,
    /// Full splitter characterization at one operating point.
    Run,
    /// Acceptance suite.
    Accept,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Sweep => "sweep",
            Command::Run => "run",
            Command::Accept => "accept",
        }
    }
}

/// Outcome of one invocation.
#[derive(Debug)]
pub struct Report {
    pub files: Vec<PathBuf>,
    /// Lines for the terminal.
    pub lines: Vec<String>,
    pub success: bool,
}

pub fn execute(cli: &Cli) -> Result<Report> {
    let config = Config::load(cli.config.as_deref(), &cli.overrides)?;
    let resolved = config.resolve()?;
    check_out_dir(&cli.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .context("starting worker pool")?;
    let context = RunContext {
        command: cli.command.name().to_string(),
        seed: cli.seed,
        config_toml: config.to_toml(),
    };

    let (tables, lines, success): (Vec<Table>, Vec<String>, bool) =
        pool.install(|| -> Result<_> {
            Ok(match cli.command {
                Command::Fig2 => (scenarios::fig2(&resolved)?.0, Vec::new(), true),
                Command::Fig3 => (scenarios::fig3(&resolved)?.0, Vec::new(), true),
                Command::Fig4 => (scenarios::fig4(&resolved)?.0, Vec::new(), true),
                Command::Sweep => (scenarios::sweep(&resolved, cli.seed)?, Vec::new(), true),
                Command::Run => {
                    let (t, c) = scenarios::run(&resolved)?;
                    let line = format!(
                        "phi_rt = {:.4} rad, I = {:.4}, g2 oracle = {:.4}, closed form = {:.4}",
                        c.phi_rt, c.overlap, c.g2_oracle, c.g2_formula
                    );
                    (t, vec![line], true)
                }
                Command::Accept => {
                    let verdicts = acceptance::run_acceptance(&resolved);
                    let ok = verdicts.iter().all(|v| v.passed);
                    let lines = verdicts.iter().map(acceptance::Verdict::line).collect();
                    (vec![acceptance::verdict_table(&verdicts)], lines, ok)
                }
            })
        })?;
    let files = write_tables(&cli.out, &tables, &context)?;
    Ok(Report {
        files,
        lines,
        success,
    })
}
