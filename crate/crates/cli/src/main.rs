//! `glt-lab`: declarative runner for matrix-sequence experiments.

mod build;
mod config;
mod diag;
mod matfile;
mod schema;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use crate::diag::ConfigError;
use crate::tasks::{Outcome, Runner};

#[derive(Parser)]
#[command(name = "glt-lab", version, about = "Run GLT matrix-sequence experiments from a JSON config")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate and execute a config, writing one CSV/JSON pair per task.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Worker threads for per-dimension parallelism.
        #[arg(long, env = "GLT_LAB_JOBS")]
        jobs: Option<usize>,
        /// Overrides the config's default seed for random sequences.
        #[arg(long)]
        seed: Option<u64>,
        /// Stop at the first task that errors or fails an expectation.
        #[arg(long)]
        strict: bool,
        /// Print configuration errors as JSON on stderr.
        #[arg(long)]
        error_json: bool,
    },
    /// Check a config without computing anything.
    Validate {
        config: PathBuf,
        #[arg(long)]
        error_json: bool,
    },
    /// Print the config JSON schema.
    Schema,
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn report_config_error(e: &ConfigError, as_json: bool) -> ExitCode {
    if as_json {
        eprintln!("{}", e.to_json());
    } else {
        eprintln!("error[{}]: {e}", serde_json::to_value(e.class).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default());
    }
    ExitCode::from(EXIT_CONFIG)
}

fn load_valid(path: &Path) -> Result<config::Loaded, ConfigError> {
    let ld = config::load(path)?;
    config::validate(&ld)?;
    Ok(ld)
}

fn run(ld: &config::Loaded, out_dir: &Path, seed: Option<u64>, strict: bool) -> Result<bool> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut runner = Runner::new(ld, seed, out_dir);
    let mut outcomes: Vec<Outcome> = Vec::new();
    let mut stop = false;
    for (idx, task) in ld.config.tasks.iter().enumerate() {
        if stop {
            outcomes.push(Outcome::skipped(task.name(idx), task.kind()));
            continue;
        }
        let o = runner.run(idx, task)?;
        let verdict = match (&o.error, o.pass()) {
            (Some(e), _) => format!("ERROR {e}"),
            (None, true) => "ok".into(),
            (None, false) => format!("FAIL {}", o.checks.iter().filter(|c| !c.pass).map(|c| format!("{} expected {} got {}", c.what, c.expected, c.observed)).collect::<Vec<_>>().join("; ")),
        };
        eprintln!("[{}/{}] {} ({}): {verdict}", idx + 1, ld.config.tasks.len(), o.name, o.kind);
        stop = strict && !o.pass();
        outcomes.push(o);
    }
    let pass = outcomes.iter().all(Outcome::pass);
    let config_name = ld.path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let summary = json!({
        "config": config_name,
        "seed": runner.builder.base_seed(),
        "random_seeds": runner.builder.seeds,
        "strict": strict,
        "pass": pass,
        "tasks": outcomes,
    });
    let path = out_dir.join("summary.json");
    std::fs::write(&path, format!("{}\n", serde_json::to_string_pretty(&summary)?))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Schema => {
            println!("{}", serde_json::to_string_pretty(&schema::schema()).expect("schema serializes"));
            ExitCode::SUCCESS
        }
        Cmd::Validate { config, error_json } => match load_valid(&config) {
            Ok(ld) => {
                eprintln!("{}: ok ({} tasks)", config.display(), ld.config.tasks.len());
                ExitCode::SUCCESS
            }
            Err(e) => report_config_error(&e, error_json),
        },
        Cmd::Run { config, out_dir, jobs, seed, strict, error_json } => {
            let ld = match load_valid(&config) {
                Ok(ld) => ld,
                Err(e) => return report_config_error(&e, error_json),
            };
            if let Some(j) = jobs.filter(|j| *j > 0) {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
                    eprintln!("warning: could not size thread pool: {e}");
                }
            }
            match run(&ld, &out_dir, seed, strict) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(EXIT_FAIL),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_FAIL)
                }
            }
        }
    }
}
