//! `hermrep`: batch front end for Hermite-representation numerics.
//!
//! Every run writes `<out>.manifest.json` next to its main output (or prints
//! the manifest to stderr when results go to stdout). Exit codes: 0 success,
//! 1 internal failure, 2 usage or configuration error.

mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use config::Job;
use run::{CliError, CliResult, Outcome};

#[derive(Parser, Debug)]
#[command(name = "hermrep", version, about = "Hermite-representation numerics")]
struct Cli {
    /// Read the job from a JSON file instead of the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    #[command(flatten)]
    Job(Job),
    /// Print the JSON schema of `--config` files.
    Schema {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_sha256: String,
    config: &'a Job,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    wall_time_ms: f64,
    status: &'static str,
    error: Option<String>,
    warnings: Vec<String>,
}

fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn digest(path: &Path) -> FileDigest {
    let sha256 = fs::read(path).map(|b| hex_sha256(&b)).unwrap_or_default();
    FileDigest { path: path.display().to_string(), sha256 }
}

fn load_config(path: &Path) -> CliResult<Job> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn execute(job: &Job) -> CliResult<()> {
    let start = Instant::now();
    let result = run::run(job);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    let config_json = serde_json::to_string(job).map_err(|e| CliError::Failure(e.to_string()))?;
    let (outcome, error) = match &result {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let manifest = Manifest {
        tool: "hermrep",
        version: env!("CARGO_PKG_VERSION"),
        command: job.name(),
        config_sha256: hex_sha256(config_json.as_bytes()),
        config: job,
        inputs: job.input().map(|p| digest(p)).into_iter().collect(),
        outputs: outcome.map(|o| o.outputs.iter().map(|p| digest(p)).collect()).unwrap_or_default(),
        wall_time_ms: elapsed,
        status: if result.is_ok() { "ok" } else { "error" },
        error,
        warnings: outcome.map(|o| o.warnings.clone()).unwrap_or_default(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Failure(e.to_string()))? + "\n";
    match job.output() {
        Some(out) => fs::write(manifest_path(out), text)?,
        None => eprint!("{text}"),
    }

    let Outcome { stdout, warnings, .. } = result?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if let Some(s) = stdout {
        print!("{s}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match (cli.config, cli.command) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --config or a subcommand, not both".into())),
        (Some(path), None) => load_config(&path).and_then(|job| execute(&job)),
        (None, Some(Command::Job(job))) => execute(&job),
        (None, Some(Command::Schema { out })) => {
            let schema = schemars::schema_for!(Job);
            let text = serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n";
            match out {
                Some(p) => fs::write(p, text).map_err(CliError::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        (None, None) => Err(CliError::Usage("no subcommand given; see --help".into())),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
