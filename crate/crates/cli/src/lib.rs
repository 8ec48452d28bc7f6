//! Command-line front end for the `agromcda` pipeline.
//!
//! Every subcommand reads one JSON config. `pipeline` runs all configured
//! stages in order and writes `run_report.json`; the other subcommands run
//! a single stage and write only that stage's files, so a pipeline run
//! produces the same files as running the stages one by one.

pub mod config;
pub mod demo;
mod error;
pub mod kite;
pub mod stages;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use config::{LoadedConfig, PipelineConfig, Stage};
pub use error::CliError;
use stages::Run;

#[derive(Debug, Parser)]
#[command(name = "agromcda", version, about = "Multicriteria planning of sustainable farming areas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate land units against crop requirements
    Suitability(RunArgs),
    /// Ordinate attribute scores and report sustainability indices
    Rap(RunArgs),
    /// Derive weights and compile the overlay coefficients
    Ahp(RunArgs),
    /// Build the aspect surfaces and their weighted composite
    Overlay(RunArgs),
    /// Split the composite into priority classes
    Classify(RunArgs),
    /// Run every configured stage and write a run report
    Pipeline(RunArgs),
    /// Write a synthetic example scenario with its config
    Demo {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to the config's `output_dir`, else `out`
    /// next to the config
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fail when any judgment matrix has a consistency ratio above 0.1
    #[arg(long)]
    pub strict: bool,
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    let (stage, args) = match command {
        Command::Suitability(a) => (Stage::Suitability, a),
        Command::Rap(a) => (Stage::Rap, a),
        Command::Ahp(a) => (Stage::Ahp, a),
        Command::Overlay(a) => (Stage::Overlay, a),
        Command::Classify(a) => (Stage::Classify, a),
        Command::Pipeline(a) => return pipeline(&a),
        Command::Demo { out } => return demo::write_scenario(&out),
    };
    let loaded = LoadedConfig::load(&args.config)?;
    loaded.availability(stage).map_err(CliError::Config)?;
    loaded.validate(&[stage])?;
    let mut run = new_run(&loaded, &args);
    run.run_stage(stage)?;
    Ok(())
}

fn new_run<'a>(loaded: &'a LoadedConfig, args: &RunArgs) -> Run<'a> {
    let c = &loaded.config;
    let out = match (&args.out, &c.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => loaded.resolve(o),
        (None, None) => loaded.resolve("out"),
    };
    Run::new(loaded, out, args.seed.or(c.seed).unwrap_or(0), args.strict || c.strict)
}

fn pipeline(args: &RunArgs) -> Result<(), CliError> {
    let loaded = LoadedConfig::load(&args.config)?;
    let plan: Vec<(Stage, Result<(), String>)> =
        Stage::ALL.iter().map(|&s| (s, loaded.availability(s))).collect();
    let runnable: Vec<Stage> = plan.iter().filter(|(_, a)| a.is_ok()).map(|(s, _)| *s).collect();
    if runnable.is_empty() {
        return Err(CliError::config("config enables no stage"));
    }
    loaded.validate(&runnable)?;

    let mut run = new_run(&loaded, args);
    let mut stages = Vec::new();
    let mut failure = None;
    for (stage, available) in plan {
        let entry = match (&failure, available) {
            (Some(_), _) => json!({"stage": stage.name(), "status": "skipped", "reason": "an earlier stage failed"}),
            (None, Err(reason)) => json!({"stage": stage.name(), "status": "skipped", "reason": reason}),
            (None, Ok(())) => match run.run_stage(stage) {
                Ok(out) => json!({"stage": stage.name(), "status": "completed", "outputs": out.files, "summary": out.summary}),
                Err(e) => {
                    let entry = json!({"stage": stage.name(), "status": "failed", "error": e.to_string(), "exit_code": e.exit_code()});
                    failure = Some(e);
                    entry
                }
            },
        };
        stages.push(entry);
    }
    let inputs: Vec<Value> = run
        .inputs
        .iter()
        .map(|(p, d)| json!({"path": p, "sha256": d}))
        .collect();
    let report = json!({
        "tool": "agromcda",
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": loaded.digest,
        "seed": run.seed,
        "strict": run.strict,
        "stages": stages,
        "inputs": inputs,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("serializable report");
    text.push('\n');
    run.write_file("run_report.json", text.as_bytes())?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Lowercase file-name form of a label.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

/// Quote a CSV field when it needs it.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
