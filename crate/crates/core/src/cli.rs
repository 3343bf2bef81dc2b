//! The `bergman-lab` command line.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::builtin::{builtin_source, list_builtin};
use crate::error::{Error, Result};
use crate::runner::{run_scenario, RunOptions};
use crate::scenario::Scenario;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "BERGMAN_LAB_THREADS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bergman-lab", version, about = "Bergman kernel, metric and Schwarz-lemma checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file, or a built-in scenario by id.
    Run {
        scenario: String,
        /// Output directory for report.csv and report.json [default: reports/<id>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Quadrature order for moments (the refinement uses twice this).
        #[arg(long)]
        order: Option<usize>,
        /// Polynomial degree for numeric kernels.
        #[arg(long)]
        degree: Option<usize>,
        /// Treat unconverged moments and approximate boundary scans as failures.
        #[arg(long)]
        strict: bool,
    },
    /// List built-in scenario ids.
    List,
    /// Print a built-in scenario.
    Describe { id: String },
}

/// Sizes the global rayon pool from `BERGMAN_LAB_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV}={v} is not a thread count")))?;
    // A pool that already exists (e.g. in tests) is left as is.
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        log::debug!("thread pool already configured: {e}");
    }
    Ok(())
}

fn load(arg: &str) -> Result<Scenario> {
    let path = Path::new(arg);
    if path.exists() {
        Scenario::from_path(path)
    } else if list_builtin().contains(&arg) {
        Scenario::from_json_str(builtin_source(arg)?)
    } else {
        Err(Error::Scenario(format!("{arg}: no such file or built-in scenario")))
    }
}

/// Runs a scenario and writes its report; returns the process exit code.
pub fn run(scenario: &str, out: Option<&Path>, opts: RunOptions) -> i32 {
    let result = load(scenario).and_then(|s| {
        let report = run_scenario(&s, opts)?;
        let dir = out.map(Path::to_path_buf).unwrap_or_else(|| Path::new("reports").join(&s.id));
        report.write(&dir)?;
        Ok((report, dir))
    });
    match result {
        Ok((report, dir)) => {
            print!("{}", report.summary());
            println!("report written to {}", dir.display());
            if report.passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

pub fn main_with(cli: Cli) -> i32 {
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    match cli.command {
        Command::Run {
            scenario,
            out,
            order,
            degree,
            strict,
        } => run(&scenario, out.as_deref(), RunOptions { order, degree, strict }),
        Command::List => {
            for id in list_builtin() {
                println!("{id}");
            }
            EXIT_PASS
        }
        Command::Describe { id } => match builtin_source(&id) {
            Ok(text) => {
                print!("{text}");
                EXIT_PASS
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT
            }
        },
    }
}
