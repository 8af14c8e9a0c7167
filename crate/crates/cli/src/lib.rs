//! `venice` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage,
//! configuration or I/O errors.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use venice_core::skew2d::Variant;
use venice_core::suspension::Example;

use crate::commands::{pretty, Outcome};
use crate::config::{Format, RunConfig};
use crate::report::summary_line;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "venice", version, about = "Builds and checks Venice-mask flow models")]
pub struct Cli {
    /// INI run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Artifact formats; the JSON report is always written.
    #[arg(long, global = true, value_enum, value_delimiter = ',', value_name = "LIST")]
    pub format: Option<Vec<Format>>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    #[value(name = "G", alias = "g")]
    G,
    #[value(name = "H", alias = "h")]
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WhichArg {
    #[value(name = "X", alias = "x")]
    X,
    #[value(name = "Y", alias = "y")]
    Y,
    #[value(name = "one_singularity", alias = "one-singularity")]
    OneSingularity,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hypotheses, leo, periodic and preimage nets of the 1D maps.
    #[command(name = "verify-1d")]
    Verify1d,
    /// Attractor halves of a skew return map and their intersection.
    Classes {
        #[arg(long, value_enum)]
        variant: VariantArg,
    },
    /// Venice-mask verdict for a singular suspension.
    Example {
        #[arg(long, value_enum)]
        which: WhichArg,
    },
    /// Cherry-field plug: DA perturbation, products and separatrices.
    Plug,
    /// Summary of the reports already in the output directory.
    Report,
}

/// Applies command-line overrides on top of the configuration file.
pub fn resolve_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = &cli.format {
        cfg.formats = f.iter().copied().collect();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, file: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(file);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Writes the report, its timings and the enabled artifacts.
pub fn write_outcome(cfg: &RunConfig, o: &Outcome) -> anyhow::Result<()> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    write(&cfg.out, &format!("{}.json", o.stem), &pretty(&o.report))?;
    write(&cfg.out, &format!("{}.timings.json", o.stem), &pretty(&o.timings))?;
    for a in o.artifacts.iter().filter(|a| cfg.formats.contains(&a.format)) {
        write(&cfg.out, &a.file, &a.contents)?;
    }
    Ok(())
}

fn execute(cli: &Cli, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Verify1d => commands::verify_1d(cfg),
        Command::Classes { variant } => commands::classes(
            cfg,
            match variant {
                VariantArg::G => Variant::G,
                VariantArg::H => Variant::H,
            },
        ),
        Command::Example { which } => commands::example(
            cfg,
            match which {
                WhichArg::X => Example::X,
                WhichArg::Y => Example::Y,
                WhichArg::OneSingularity => Example::OneSingularity,
            },
        ),
        Command::Plug => commands::plug(cfg),
        Command::Report => commands::summary(cfg, &cfg.out),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match pool.install(|| execute(&cli, &cfg)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    for c in &outcome.report.checks {
        println!("{}", summary_line(c));
    }
    println!("verdict: {}", outcome.report.verdict);
    if let Err(e) = write_outcome(&cfg, &outcome) {
        eprintln!("error: {e:#}");
        return EXIT_USAGE;
    }
    if outcome.report.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
