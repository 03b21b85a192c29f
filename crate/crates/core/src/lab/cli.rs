//! Command-line front end. Exit status: 0 ok, 2 usage or config error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::config::ExperimentConfig;
use super::experiments::run_experiment;
use super::figures::{figure_tables, FIGURES};
use super::table::{write_outputs, Metadata, RunStatus};
use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nqr-lab", about = "Run holonomy noise experiments and emit figure data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads, 0 = one per core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Parse and check a config without running it.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the CSV data behind one figure.
    FiguresData {
        #[arg(long)]
        figure: u32,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
    /// Print the version.
    Version,
}

fn exit_for(e: &Error) -> i32 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERIC
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_for(e)
}

/// Parse `args` (including the program name) and execute; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Version => {
            println!("nqr-lab {}", env!("CARGO_PKG_VERSION"));
            EXIT_OK
        }
        Command::ValidateConfig { config } => match ExperimentConfig::load(&config) {
            Ok(c) => {
                println!("{}: ok ({})", config.display(), c.experiment.name());
                EXIT_OK
            }
            Err(e) => report(&e),
        },
        Command::FiguresData { figure, out } => {
            if !FIGURES.contains(&figure) {
                eprintln!("error: no data for figure {figure}; expected one of {FIGURES:?}");
                return EXIT_CONFIG;
            }
            match figure_data(figure, &out) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    EXIT_OK
                }
                Err(e) => report(&e),
            }
        }
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => run_config(&config, out, seed, threads),
    }
}

fn figure_data(figure: u32, out: &Path) -> crate::Result<Vec<PathBuf>> {
    let tables = figure_tables(figure)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut paths = Vec::new();
    for t in &tables {
        let stem = format!("fig{figure}");
        let file = if t.name == stem {
            format!("{stem}.csv")
        } else {
            format!("{stem}_{}.csv", t.name)
        };
        let path = out.join(file);
        t.write_csv(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

fn run_config(path: &Path, out: Option<PathBuf>, seed: Option<u64>, threads: usize) -> i32 {
    let mut cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => return report(&e),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(dir) = out {
        cfg.output.dir = dir;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {threads} threads: {e}");
            return EXIT_NUMERIC;
        }
    };
    let echo = serde_json::to_value(&cfg).unwrap_or_default();
    let mut meta = Metadata::new(cfg.experiment.name(), cfg.seed, echo);
    let (output, failure) = match pool.install(|| run_experiment(&cfg)) {
        Ok(o) => (o, None),
        Err(f) => (f.partial, Some(f.error)),
    };
    meta.summary = output.summary;
    if let Some(e) = &failure {
        meta.status = RunStatus::Partial;
        meta.error = Some(e.to_string());
    }
    match write_outputs(&cfg.output.dir, &cfg.stem(), &output.tables, &mut meta) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => return report(&e),
    }
    match failure {
        None => EXIT_OK,
        Some(e) => report(&e),
    }
}
